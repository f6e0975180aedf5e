#include "wtlab/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace wtlab {

GmresResult gmres(const LinearOp& op, const CVec& b, double rel_tol, int restart, int max_iter) {
  const Eigen::Index n = b.size();
  GmresResult res;
  res.x = CVec::Zero(n);
  const double bnorm = b.norm();
  if (bnorm == 0.0) {
    res.converged = true;
    return res;
  }
  const int m = std::max(1, std::min<int>(restart, static_cast<int>(n)));
  while (res.iterations < max_iter) {
    CVec r = b - op(res.x);
    const double beta = r.norm();
    res.relative_residual = beta / bnorm;
    if (res.relative_residual <= rel_tol) {
      res.converged = true;
      return res;
    }
    CMat v(n, m + 1);
    CMat h = CMat::Zero(m + 1, m);
    std::vector<double> cs(m);
    std::vector<cplx> sn(m);
    CVec g = CVec::Zero(m + 1);
    g[0] = beta;
    v.col(0) = r / beta;
    int k = 0;
    for (int j = 0; j < m; ++j) {
      CVec w = op(v.col(j));
      ++res.iterations;
      for (int pass = 0; pass < 2; ++pass) {
        for (int i = 0; i <= j; ++i) {
          const cplx hij = v.col(i).dot(w);
          h(i, j) += hij;
          w -= hij * v.col(i);
        }
      }
      const double hnext = w.norm();
      h(j + 1, j) = hnext;
      if (hnext > 0) v.col(j + 1) = w / hnext;
      for (int i = 0; i < j; ++i) {
        const cplx tmp = cs[i] * h(i, j) + sn[i] * h(i + 1, j);
        h(i + 1, j) = -std::conj(sn[i]) * h(i, j) + cs[i] * h(i + 1, j);
        h(i, j) = tmp;
      }
      const cplx a = h(j, j);
      const double rr = std::hypot(std::abs(a), hnext);
      if (std::abs(a) == 0.0) {
        cs[j] = 0.0;
        sn[j] = 1.0;
      } else {
        cs[j] = std::abs(a) / rr;
        sn[j] = (a / std::abs(a)) * hnext / rr;
      }
      h(j, j) = cs[j] * a + sn[j] * h(j + 1, j);
      h(j + 1, j) = 0.0;
      g[j + 1] = -std::conj(sn[j]) * g[j];
      g[j] = cs[j] * g[j];
      k = j + 1;
      res.relative_residual = std::abs(g[j + 1]) / bnorm;
      if (res.relative_residual <= rel_tol || hnext == 0.0 || res.iterations >= max_iter) break;
    }
    CVec y = h.topLeftCorner(k, k).triangularView<Eigen::Upper>().solve(g.head(k));
    res.x += v.leftCols(k) * y;
  }
  const double final_rel = (b - op(res.x)).norm() / bnorm;
  res.relative_residual = final_rel;
  res.converged = final_rel <= rel_tol;
  return res;
}

DenseSolve solve_dense(const CMat& a, const CVec& b, double rcond_floor) {
  DenseSolve out;
  Eigen::PartialPivLU<CMat> lu(a);
  const double rc = lu.rcond();
  out.condition = rc > 0 ? 1.0 / rc : std::numeric_limits<double>::infinity();
  if (rc >= rcond_floor && std::isfinite(rc)) {
    out.x = lu.solve(b);
    return out;
  }
  out.least_squares = true;
  Eigen::CompleteOrthogonalDecomposition<CMat> cod(a);
  cod.setThreshold(rcond_floor);
  out.x = cod.solve(b);
  return out;
}

MonotoneCubic::MonotoneCubic(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw ValidationError("MonotoneCubic: need at least two nodes");
  for (std::size_t i = 1; i < n; ++i)
    if (!(x_[i] > x_[i - 1])) throw ValidationError("MonotoneCubic: nodes must increase");
  std::vector<double> delta(n - 1);
  for (std::size_t i = 0; i + 1 < n; ++i) delta[i] = (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]);
  d_.assign(n, 0.0);
  d_[0] = delta[0];
  d_[n - 1] = delta[n - 2];
  for (std::size_t i = 1; i + 1 < n; ++i) {
    if (delta[i - 1] * delta[i] <= 0) {
      d_[i] = 0.0;
    } else {
      // weighted harmonic mean (Fritsch-Butland), keeps the interpolant monotone
      const double h0 = x_[i] - x_[i - 1], h1 = x_[i + 1] - x_[i];
      const double w1 = 2 * h1 + h0, w2 = h1 + 2 * h0;
      d_[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
    }
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    if (delta[i] == 0.0) {
      d_[i] = 0.0;
      d_[i + 1] = 0.0;
    }
  }
  if (n > 2) {
    if (d_[0] * delta[0] < 0) d_[0] = 0;
    if (d_[n - 1] * delta[n - 2] < 0) d_[n - 1] = 0;
  }
}

std::size_t MonotoneCubic::cell(double t) const {
  if (t <= x_.front()) return 0;
  if (t >= x_.back()) return x_.size() - 2;
  auto it = std::upper_bound(x_.begin(), x_.end(), t);
  return static_cast<std::size_t>(it - x_.begin()) - 1;
}

double MonotoneCubic::eval_cell(std::size_t i, double t) const {
  const double h = x_[i + 1] - x_[i];
  const double s = (t - x_[i]) / h;
  const double h00 = (1 + 2 * s) * (1 - s) * (1 - s);
  const double h10 = s * (1 - s) * (1 - s);
  const double h01 = s * s * (3 - 2 * s);
  const double h11 = s * s * (s - 1);
  return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
}

double MonotoneCubic::operator()(double t) const {
  if (t <= x_.front()) return y_.front();
  if (t >= x_.back()) return y_.back();
  return eval_cell(cell(t), t);
}

double MonotoneCubic::derivative(double t) const {
  const std::size_t i = cell(t);
  const double h = x_[i + 1] - x_[i];
  const double s = std::clamp((t - x_[i]) / h, 0.0, 1.0);
  const double d00 = 6 * s * s - 6 * s;
  const double d10 = 3 * s * s - 4 * s + 1;
  const double d01 = -d00;
  const double d11 = 3 * s * s - 2 * s;
  return (d00 * y_[i] + d01 * y_[i + 1]) / h + d10 * d_[i] + d11 * d_[i + 1];
}

double MonotoneCubic::inverse(double target) const {
  if (target <= y_.front()) return x_.front();
  if (target >= y_.back()) {
    // leftmost node that already attains the final value
    std::size_t i = y_.size() - 1;
    while (i > 0 && y_[i - 1] >= target) --i;
    return x_[i];
  }
  // leftmost cell whose right value reaches the target
  auto it = std::lower_bound(y_.begin(), y_.end(), target);
  std::size_t i = static_cast<std::size_t>(it - y_.begin());
  if (y_[i] == target) return x_[i];
  --i;
  double lo = x_[i], hi = x_[i + 1];
  for (int it2 = 0; it2 < 200 && hi - lo > 1e-15 * (1 + std::abs(lo)); ++it2) {
    const double mid = 0.5 * (lo + hi);
    if (eval_cell(i, mid) < target) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace wtlab
