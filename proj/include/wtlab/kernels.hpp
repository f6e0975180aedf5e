#pragma once

// Hot loops shared by the solvers and the Monte Carlo harness. Every kernel has a
// serial reference and an OpenMP version; both reduce per-row partials in index
// order, so the two paths agree bitwise regardless of the thread count.

#include <functional>

#include "wtlab/common.hpp"

namespace wtlab::kernels {

// y = S x for dense real symmetric S.
void variance_matvec(const RMat& s, const CVec& x, CVec& y, Exec exec);

// (1/N) sum_jk A1_jk A2_kj g1_j g2_k  with g_i = 1/(lambda_i - z_i): the normalized
// trace <G(z1) A1 G(z2) A2> written in the eigenbasis of H (A1t = U* A1 U).
cplx chain_trace2(const RVec& lambda, const CMat& a1t, const CMat& a2t, cplx z1, cplx z2,
                  Exec exec);

// (1/N) sum_j A_jj / (lambda_j - z)
cplx chain_trace1(const RVec& lambda, const CMat& at, cplx z, Exec exec);

// max over j,k in bulk of |At_jk - delta_jk c_j|
double max_overlap_deviation(const CMat& at, const RVec& centering, const std::vector<int>& bulk,
                             Exec exec);

// Runs body(i) for i in [0, count). Parallel mode uses dynamic scheduling; callers
// store per-index results so that aggregation order is fixed.
void for_each_index(int count, const std::function<void(int)>& body, Exec exec);

int max_threads();
void set_threads(int k);

}  // namespace wtlab::kernels
