#pragma once

#include <functional>

#include "wtlab/common.hpp"

namespace wtlab {

using LinearOp = std::function<CVec(const CVec&)>;

struct GmresResult {
  CVec x;
  double relative_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Restarted GMRES with modified Gram-Schmidt and Givens rotations.
GmresResult gmres(const LinearOp& op, const CVec& b, double rel_tol, int restart = 60,
                  int max_iter = 600);

struct DenseSolve {
  CVec x;
  double condition = 0.0;  // 1 / rcond estimate
  bool least_squares = false;
};

// LU solve; when the reciprocal condition estimate falls below rcond_floor, switches to a
// rank-revealing least-squares solve.
DenseSolve solve_dense(const CMat& a, const CVec& b, double rcond_floor = 1e-13);

// Monotone piecewise cubic Hermite interpolant (Fritsch-Carlson slopes).
class MonotoneCubic {
 public:
  MonotoneCubic(std::vector<double> x, std::vector<double> y);
  double operator()(double t) const;
  double derivative(double t) const;
  // Leftmost t with f(t) = target, for nondecreasing data.
  double inverse(double target) const;

 private:
  std::size_t cell(double t) const;
  double eval_cell(std::size_t i, double t) const;
  std::vector<double> x_, y_, d_;
};

}  // namespace wtlab
