#include "wtlab/kernels.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <exception>

namespace wtlab::kernels {

namespace {

// S is symmetric, so row j is read as column j (contiguous in column-major storage).
inline cplx row_dot(const RMat& s, Eigen::Index j, const CVec& x) {
  cplx acc = 0.0;
  const Eigen::Index n = s.rows();
  const double* col = s.col(j).data();
  for (Eigen::Index k = 0; k < n; ++k) acc += col[k] * x[k];
  return acc;
}

inline cplx chain_row(const RVec& lambda, const CMat& a1t, const CMat& a2t, const CVec& g2,
                      Eigen::Index j, cplx z1) {
  const cplx g1 = 1.0 / (lambda[j] - z1);
  cplx acc = 0.0;
  const Eigen::Index n = lambda.size();
  for (Eigen::Index k = 0; k < n; ++k) acc += a1t(j, k) * a2t(k, j) * g2[k];
  return acc * g1;
}

inline double deviation_row(const CMat& at, const RVec& c, const std::vector<int>& bulk,
                            std::size_t r) {
  const int j = bulk[r];
  double best = 0.0;
  for (int k : bulk) {
    cplx d = at(j, k);
    if (k == j) d -= c[j];
    best = std::max(best, std::abs(d));
  }
  return best;
}

}  // namespace

void variance_matvec(const RMat& s, const CVec& x, CVec& y, Exec exec) {
  const Eigen::Index n = s.rows();
  y.resize(n);
  if (exec == Exec::Serial) {
    for (Eigen::Index j = 0; j < n; ++j) y[j] = row_dot(s, j, x);
    return;
  }
#pragma omp parallel for schedule(static)
  for (Eigen::Index j = 0; j < n; ++j) y[j] = row_dot(s, j, x);
}

cplx chain_trace2(const RVec& lambda, const CMat& a1t, const CMat& a2t, cplx z1, cplx z2,
                  Exec exec) {
  const Eigen::Index n = lambda.size();
  CVec g2(n);
  for (Eigen::Index k = 0; k < n; ++k) g2[k] = 1.0 / (lambda[k] - z2);
  CVec partial(n);
  if (exec == Exec::Serial) {
    for (Eigen::Index j = 0; j < n; ++j) partial[j] = chain_row(lambda, a1t, a2t, g2, j, z1);
  } else {
#pragma omp parallel for schedule(static)
    for (Eigen::Index j = 0; j < n; ++j) partial[j] = chain_row(lambda, a1t, a2t, g2, j, z1);
  }
  cplx acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) acc += partial[j];
  return acc / static_cast<double>(n);
}

cplx chain_trace1(const RVec& lambda, const CMat& at, cplx z, Exec) {
  const Eigen::Index n = lambda.size();
  cplx acc = 0.0;
  for (Eigen::Index j = 0; j < n; ++j) acc += at(j, j) / (lambda[j] - z);
  return acc / static_cast<double>(n);
}

double max_overlap_deviation(const CMat& at, const RVec& centering, const std::vector<int>& bulk,
                             Exec exec) {
  const std::size_t b = bulk.size();
  std::vector<double> partial(b, 0.0);
  if (exec == Exec::Serial) {
    for (std::size_t r = 0; r < b; ++r) partial[r] = deviation_row(at, centering, bulk, r);
  } else {
#pragma omp parallel for schedule(static)
    for (std::size_t r = 0; r < b; ++r) partial[r] = deviation_row(at, centering, bulk, r);
  }
  double best = 0.0;
  for (double v : partial) best = std::max(best, v);
  return best;
}

void for_each_index(int count, const std::function<void(int)>& body, Exec exec) {
  if (exec == Exec::Serial) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::exception_ptr failure = nullptr;
#pragma omp parallel for schedule(dynamic, 1)
  for (int i = 0; i < count; ++i) {
    try {
      body(i);
    } catch (...) {
#pragma omp critical(wtlab_for_each_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

int max_threads() { return omp_get_max_threads(); }

void set_threads(int k) {
  if (k > 0) omp_set_num_threads(k);
}

}  // namespace wtlab::kernels
