#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace wtlab {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;
using CMat = Eigen::MatrixXcd;
using RMat = Eigen::MatrixXd;

inline constexpr cplx I_unit{0.0, 1.0};

enum class Symmetry { RealSymmetric, ComplexHermitian };

// Bad input: configuration, shapes, preconditions.
class ValidationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A numerical procedure did not deliver its contract (non-convergence, singular solve).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Exec { Serial, Parallel };

// Normalized trace <X> = tr(X)/N and vector average.
inline cplx avg(const CVec& v) { return v.mean(); }
inline double avg(const RVec& v) { return v.mean(); }
inline cplx ntrace(const CMat& x) { return x.trace() / static_cast<double>(x.rows()); }

// <|A|^2>^{1/2}
inline double hs_norm(const CMat& a) {
  return a.norm() / std::sqrt(static_cast<double>(a.rows()));
}

inline cplx reflect_lower(cplx z) { return {z.real(), -std::abs(z.imag())}; }
inline cplx reflect_upper(cplx z) { return {z.real(), std::abs(z.imag())}; }

inline int sign_of(double x) { return x > 0 ? 1 : (x < 0 ? -1 : 0); }

std::string symmetry_name(Symmetry s);
Symmetry parse_symmetry(const std::string& s);

}  // namespace wtlab
