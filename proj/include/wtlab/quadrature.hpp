#pragma once

#include <functional>

#include "wtlab/common.hpp"

namespace wtlab {

struct QuadratureOptions {
  double abs_tol = 1e-11;
  double rel_tol = 1e-11;
  int max_intervals = 20000;
};

struct QuadratureInfo {
  double error_estimate = 0.0;
  int evaluations = 0;
  int intervals = 0;
  bool converged = false;
};

using MatrixIntegrand = std::function<CMat(double)>;

// Globally adaptive Gauss-Kronrod (7/15) over the union of the panels [b_i, b_{i+1}].
// Error is measured as the largest entrywise |K15 - G7|.
CMat integrate_panels(const MatrixIntegrand& f, const std::vector<double>& breakpoints,
                      const QuadratureOptions& opt, QuadratureInfo* info = nullptr);

}  // namespace wtlab
