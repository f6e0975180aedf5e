#pragma once

#include <limits>
#include <optional>
#include <string>

#include "wtlab/dyson.hpp"

namespace wtlab {

struct StabilityEig {
  cplx beta = 0.0;
  CVec right_vec;
  CVec left_vec;
  bool isolated = false;
  double gap = 0.0;          // |second smallest| - |beta|
  double second_modulus = 0.0;

  // Pi[x] = r <l, x> / <l, r>
  CVec project(const CVec& x) const;
  CMat projector() const;
  // Coefficient c with Pi[x] = c r.
  cplx coefficient(const CVec& x) const;
};

struct StabilityOptions {
  int dense_limit = 2048;     // full eigendecomposition up to this size
  double isolation_floor = 0.05;
  double isolation_factor = 3.0;
};

CMat stability_matrix(const EnsembleSpec& e, cplx z1, cplx z2, double tol);
CMat stability_matrix(const EnsembleSpec& e, const CVec& m1, const CVec& m2);

StabilityEig smallest_eig(const CMat& b, double tol, const StabilityOptions& opt = {});

// Same data for B = 1 - diag(w) S from the k x k reduction on block indicators; empty unless
// the ensemble has a block layout and w is constant on blocks. All other eigenvalues are 1.
std::optional<StabilityEig> smallest_eig_blocks(const EnsembleSpec& e, const CVec& w,
                                                const StabilityOptions& opt = {});

// Projector of 1 - |m|^2 S at a real energy: Pi[x] = Im m <|m|^-2 Im m, x> / || |m|^-1 Im m ||^2.
CMat explicit_projector_real(const CVec& m_axis);

double kappa(const EnsembleSpec& e, double energy, double tol, double eta_floor = 1e-4);
double kappa_from_m(const CVec& m_axis);

struct RegularityOptions {
  double tol = 1e-12;                 // Dyson tolerance
  double far_distance = std::numeric_limits<double>::infinity();
  StabilityOptions stab;
};

// Eigen data of B_{w1,w2} = 1 - M(w1) M(w2) S together with the Dyson vectors used.
struct ProjectorData {
  CVec mw1, mw2;
  StabilityEig eig;
  bool far = false;  // not isolated, or |z1 - z2|, |conj z1 - z2| both beyond far_distance / 2
};

ProjectorData projector_data(const EnsembleSpec& e, cplx w1, cplx w2, cplx z1, cplx z2,
                             const RegularityOptions& opt);

double regularity_residual(const CMat& a, const EnsembleSpec& e, cplx z1, cplx z2, double tol,
                           const RegularityOptions& opt = {});

struct RegularDecomposition {
  CMat regular_part;
  cplx scalar_part = 0.0;
  CVec direction;
  double residual = 0.0;
  bool fallback = false;
};

RegularDecomposition regularize(const CMat& b, const EnsembleSpec& e, cplx z1, cplx z2, double t,
                                double T, double tol, const RegularityOptions& opt = {});

struct SDecomposition {
  CMat s_ring;
  CVec s_vec;
  bool fallback = false;
  double max_row_residual = 0.0;
};

SDecomposition decompose_S(const EnsembleSpec& e, cplx z1, cplx z2, double tol,
                           const RegularityOptions& opt = {});

struct IsotropicObservable {
  CMat a2;
  cplx a = 0.0;
  bool fallback = false;
};

IsotropicObservable isotropic_observable(const CVec& x, const CVec& y, const EnsembleSpec& e,
                                         cplx z1, cplx z2, const RegularityOptions& opt = {});

struct ChainApprox {
  CMat value;
  int order = 2;
  std::vector<cplx> spectral;
  double condition = 0.0;
  bool least_squares = false;
};

ChainApprox chain_approx2(const EnsembleSpec& e, cplx z1, const CMat& b, cplx z2,
                          double tol = 1e-13);
ChainApprox chain_approx2(const EnsembleSpec& e, const CVec& m1, const CMat& b, const CVec& m2);

ChainApprox chain_approx3(const EnsembleSpec& e, cplx z1, const CMat& a1, cplx z2, const CMat& a2,
                          double tol = 1e-13);

struct SaturatedF {
  double norm = 0.0;
  double gap = 0.0;
  RVec principal_vec;
};

SaturatedF saturated_F(const EnsembleSpec& e, cplx z1, cplx z2, double tol = 1e-13);
SaturatedF saturated_F(const EnsembleSpec& e, const CVec& m1, const CVec& m2);

}  // namespace wtlab
