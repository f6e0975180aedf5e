#include "wtlab/stability.hpp"

#include <algorithm>
#include <cmath>

#include "wtlab/flow.hpp"
#include "wtlab/linalg.hpp"

namespace wtlab {

CVec StabilityEig::project(const CVec& x) const { return coefficient(x) * right_vec; }

cplx StabilityEig::coefficient(const CVec& x) const {
  return left_vec.dot(x) / left_vec.dot(right_vec);
}

CMat StabilityEig::projector() const {
  return right_vec * left_vec.adjoint() / left_vec.dot(right_vec);
}

CMat stability_matrix(const EnsembleSpec& e, const CVec& m1, const CVec& m2) {
  const CVec w = m1.cwiseProduct(m2);
  CMat b = -(w.asDiagonal() * e.s.cast<cplx>());
  b.diagonal().array() += 1.0;
  return b;
}

CMat stability_matrix(const EnsembleSpec& e, cplx z1, cplx z2, double tol) {
  const DysonSolution s1 = solve_vde(e, z1, tol);
  const DysonSolution s2 = solve_vde(e, z2, tol);
  return stability_matrix(e, s1.m, s2.m);
}

namespace {

CVec inverse_iterate(const Eigen::PartialPivLU<CMat>& lu, CVec x, bool adjoint, int steps) {
  for (int k = 0; k < steps; ++k) {
    x = adjoint ? CVec(lu.adjoint().solve(x)) : CVec(lu.solve(x));
    const double nrm = x.norm();
    if (!(nrm > 0) || !std::isfinite(nrm)) break;
    x /= nrm;
  }
  return x;
}

// Shift slightly off the eigenvalue so the factorization stays usable.
Eigen::PartialPivLU<CMat> shifted_lu(const CMat& b, cplx shift) {
  CMat a = b;
  a.diagonal().array() -= shift;
  return Eigen::PartialPivLU<CMat>(a);
}

cplx off_shift(cplx beta, double scale) {
  return beta + cplx(1e-11, 1e-11) * std::max(1.0, scale);
}

StabilityEig finish(const CMat& b, cplx beta, CVec r, double second, const StabilityOptions& opt) {
  StabilityEig out;
  const double scale = b.cwiseAbs().maxCoeff();
  const cplx sigma = off_shift(beta, scale);
  auto lu = shifted_lu(b, sigma);
  r = inverse_iterate(lu, r, false, 2);
  CVec l = inverse_iterate(lu, CVec(CVec::Ones(b.rows()) + r), true, 3);
  out.right_vec = r / r.norm();
  out.left_vec = l / l.norm();
  out.beta = out.right_vec.dot(b * out.right_vec);  // Rayleigh quotient with |r| = 1
  out.second_modulus = second;
  out.gap = second - std::abs(out.beta);
  out.isolated =
      second >= std::max(opt.isolation_floor, opt.isolation_factor * std::abs(out.beta));
  return out;
}

}  // namespace

StabilityEig smallest_eig(const CMat& b, double tol, const StabilityOptions& opt) {
  if (b.rows() != b.cols() || b.rows() == 0)
    throw ValidationError("smallest_eig: square nonempty matrix required");
  const Eigen::Index n = b.rows();
  if (n <= opt.dense_limit) {
    Eigen::ComplexEigenSolver<CMat> ces(b, true);
    if (ces.info() != Eigen::Success) throw NumericalError("smallest_eig: eigensolver failed");
    const CVec& ev = ces.eigenvalues();
    std::vector<Eigen::Index> idx(n);
    for (Eigen::Index i = 0; i < n; ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(),
              [&](Eigen::Index i, Eigen::Index j) { return std::abs(ev[i]) < std::abs(ev[j]); });
    const double second =
        n > 1 ? std::abs(ev[idx[1]]) : std::numeric_limits<double>::infinity();
    return finish(b, ev[idx[0]], ces.eigenvectors().col(idx[0]), second, opt);
  }
  // Inverse power iteration seeded with the constant vector.
  Eigen::PartialPivLU<CMat> lu(b);
  CVec x = CVec::Ones(n) / std::sqrt(static_cast<double>(n));
  cplx beta = x.dot(b * x);
  for (int k = 0; k < 2000; ++k) {
    x = lu.solve(x);
    x /= x.norm();
    const cplx next = x.dot(b * x);
    const bool done = std::abs(next - beta) <= tol * (1 + std::abs(next));
    beta = next;
    if (done && k > 3) break;
  }
  // Second smallest modulus from the deflated inverse: (1 - Pi) B^{-1} (1 - Pi).
  StabilityEig first = finish(b, beta, x, std::numeric_limits<double>::infinity(), opt);
  auto deflate = [&](const CVec& v) { return CVec(v - first.project(v)); };
  CVec y = deflate(CVec::LinSpaced(n, 1.0, 2.0));
  y /= y.norm();
  double growth = 0.0;
  for (int k = 0; k < 300; ++k) {
    CVec next = deflate(lu.solve(y));
    const double g = next.norm();
    if (!(g > 0)) break;
    const bool done = std::abs(g - growth) <= 1e-10 * g;
    growth = g;
    y = next / g;
    if (done && k > 3) break;
  }
  const double second = growth > 0 ? 1.0 / growth : std::numeric_limits<double>::infinity();
  return finish(b, first.beta, first.right_vec, second, opt);
}

std::optional<StabilityEig> smallest_eig_blocks(const EnsembleSpec& e, const CVec& w,
                                                const StabilityOptions& opt) {
  if (!e.blocks || w.size() != e.n) return std::nullopt;
  const BlockLayout& bl = *e.blocks;
  const int k = static_cast<int>(bl.values.rows());
  CVec wb(k);
  RVec nb(k);
  for (int b = 0; b < k; ++b) {
    const int lo = bl.offsets[b], hi = bl.offsets[b + 1];
    nb[b] = hi - lo;
    wb[b] = w[lo];
    const double spread = (w.segment(lo, hi - lo).array() - wb[b]).abs().maxCoeff();
    if (spread > 1e-11 * (1 + std::abs(wb[b]))) return std::nullopt;
  }
  const CMat v = bl.values.cast<cplx>();
  CMat r = -(wb.asDiagonal() * v * nb.asDiagonal());
  r.diagonal().array() += 1.0;
  CMat l = -(v * nb.cwiseProduct(wb.conjugate()).asDiagonal());
  l.diagonal().array() += 1.0;
  Eigen::ComplexEigenSolver<CMat> cr(r, true), cl(l, true);
  if (cr.info() != Eigen::Success || cl.info() != Eigen::Success)
    throw NumericalError("smallest_eig_blocks: eigensolver failed");
  std::vector<int> idx(k);
  for (int i = 0; i < k; ++i) idx[i] = i;
  std::sort(idx.begin(), idx.end(), [&](int i, int j) {
    return std::abs(cr.eigenvalues()[i]) < std::abs(cr.eigenvalues()[j]);
  });
  const cplx beta = cr.eigenvalues()[idx[0]];
  double second = std::numeric_limits<double>::infinity();
  if (k > 1) second = std::abs(cr.eigenvalues()[idx[1]]);
  if (e.n > k) second = std::min(second, 1.0);
  int li = 0;
  for (int i = 1; i < k; ++i)
    if (std::abs(cl.eigenvalues()[i] - std::conj(beta)) <
        std::abs(cl.eigenvalues()[li] - std::conj(beta)))
      li = i;
  auto expand = [&](const CVec& c) {
    CVec x(e.n);
    for (int b = 0; b < k; ++b) x.segment(bl.offsets[b], bl.offsets[b + 1] - bl.offsets[b]).setConstant(c[b]);
    return CVec(x / x.norm());
  };
  StabilityEig out;
  out.beta = beta;
  out.right_vec = expand(cr.eigenvectors().col(idx[0]));
  out.left_vec = expand(cl.eigenvectors().col(li));
  out.second_modulus = second;
  out.gap = second - std::abs(beta);
  out.isolated = second >= std::max(opt.isolation_floor, opt.isolation_factor * std::abs(beta));
  return out;
}

CMat explicit_projector_real(const CVec& m) {
  const RVec f = m.imag();
  const RVec g = f.cwiseQuotient(m.cwiseAbs2());
  return (f * g.transpose() / g.dot(f)).cast<cplx>();
}

double kappa_from_m(const CVec& m) {
  const RVec im = m.imag();
  return 2.0 * (im.cwiseAbs2().cwiseQuotient(m.cwiseAbs2())).mean() / im.mean();
}

double kappa(const EnsembleSpec& e, double energy, double tol, double eta_floor) {
  return kappa_from_m(m_on_axis(e, energy, eta_floor, tol));
}

ProjectorData projector_data(const EnsembleSpec& e, cplx w1, cplx w2, cplx z1, cplx z2,
                             const RegularityOptions& opt) {
  ProjectorData pd;
  pd.mw1 = solve_vde(e, w1, opt.tol).m;
  pd.mw2 = solve_vde(e, w2, opt.tol).m;
  if (auto reduced = smallest_eig_blocks(e, pd.mw1.cwiseProduct(pd.mw2), opt.stab))
    pd.eig = *reduced;
  else
    pd.eig = smallest_eig(stability_matrix(e, pd.mw1, pd.mw2), 1e-13, opt.stab);
  const double dist = std::min(std::abs(z1 - z2), std::abs(std::conj(z1) - z2));
  pd.far = !pd.eig.isolated || dist > opt.far_distance / 2;
  return pd;
}

double regularity_residual(const CMat& a, const EnsembleSpec& e, cplx z1, cplx z2, double tol,
                           const RegularityOptions& opt) {
  if (a.rows() != e.n || a.cols() != e.n)
    throw ValidationError("regularity_residual: dimension mismatch");
  const double scale = hs_norm(a);
  if (scale == 0.0) return 0.0;
  RegularityOptions o = opt;
  o.tol = tol;
  const ProjectorData pd = projector_data(e, reflect_lower(z1), reflect_upper(z2), z1, z2, o);
  if (pd.far) return 0.0;
  const CVec v = pd.mw1.cwiseProduct(a.diagonal()).cwiseProduct(pd.mw2);
  return pd.eig.project(v).cwiseAbs().maxCoeff() / scale;
}

namespace {

bool degenerate_coefficient(const StabilityEig& eig, const CVec& v) {
  return std::abs(eig.left_vec.dot(v)) <= 1e-12 * eig.left_vec.norm() * v.norm();
}

}  // namespace

RegularDecomposition regularize(const CMat& b, const EnsembleSpec& e, cplx z1, cplx z2, double t,
                                double T, double tol, const RegularityOptions& opt) {
  if (b.rows() != e.n || b.cols() != e.n) throw ValidationError("regularize: dimension mismatch");
  if (!(t >= 0 && t <= T)) throw ValidationError("regularize: need 0 <= t <= T");
  RegularityOptions o = opt;
  o.tol = tol;
  RegularDecomposition out;
  const CVec z1t = flow_map(e, z1, t, T);
  const CVec z2t = flow_map(e, z2, t, T);
  const double ratio = double(sign_of(z2.imag())) / double(sign_of(z1.imag()));
  const CVec zhat = z1t.real().cast<cplx>() - I_unit * ratio * z1t.imag().cast<cplx>();
  out.direction = zhat - z2t;

  const ProjectorData pd = projector_data(e, reflect_lower(z2), reflect_upper(z1), z1, z2, o);
  const CVec w = pd.mw1.cwiseProduct(pd.mw2);
  const CVec den = w.cwiseProduct(out.direction);
  if (pd.far || degenerate_coefficient(pd.eig, den)) {
    out.regular_part = b;
    out.scalar_part = 0.0;
    out.fallback = true;
  } else {
    const CVec num = w.cwiseProduct(b.diagonal());
    out.scalar_part = pd.eig.coefficient(num) / pd.eig.coefficient(den);
    out.regular_part = b;
    out.regular_part.diagonal() -= out.scalar_part * out.direction;
  }
  const double scale = hs_norm(b);
  if (scale == 0.0 || pd.far) {
    out.residual = 0.0;
  } else {
    const CVec v = w.cwiseProduct(out.regular_part.diagonal());
    out.residual = pd.eig.project(v).cwiseAbs().maxCoeff() / scale;
  }
  return out;
}

SDecomposition decompose_S(const EnsembleSpec& e, cplx z1, cplx z2, double tol,
                           const RegularityOptions& opt) {
  RegularityOptions o = opt;
  o.tol = tol;
  const int n = e.n;
  SDecomposition out;
  const CMat ns = (static_cast<double>(n) * e.s).cast<cplx>();
  const ProjectorData pd = projector_data(e, reflect_lower(z2), reflect_upper(z1), z1, z2, o);
  const CVec w = pd.mw1.cwiseProduct(pd.mw2);
  if (pd.far || degenerate_coefficient(pd.eig, w)) {
    out.s_ring = ns;
    out.s_vec = CVec::Zero(n);
    out.fallback = true;
    return out;
  }
  const cplx cw = pd.eig.coefficient(w);
  out.s_vec.resize(n);
  out.s_ring.resize(n, n);
  for (int p = 0; p < n; ++p) {
    const CVec row = ns.row(p).transpose();
    const cplx sp = pd.eig.coefficient(w.cwiseProduct(row)) / cw;
    out.s_vec[p] = sp;
    const CVec ring = row - sp * CVec::Ones(n);
    out.s_ring.row(p) = ring.transpose();
    const double scale = row.norm() / std::sqrt(double(n));
    if (scale > 0) {
      const double r = pd.eig.project(w.cwiseProduct(ring)).cwiseAbs().maxCoeff() / scale;
      out.max_row_residual = std::max(out.max_row_residual, r);
    }
  }
  return out;
}

IsotropicObservable isotropic_observable(const CVec& x, const CVec& y, const EnsembleSpec& e,
                                         cplx z1, cplx z2, const RegularityOptions& opt) {
  if (x.size() != e.n || y.size() != e.n)
    throw ValidationError("isotropic_observable: dimension mismatch");
  RegularityOptions o = opt;
  o.tol = std::min(opt.tol, 1e-12);
  const double n = e.n;
  const double rn = std::sqrt(n);
  IsotropicObservable out;
  const CMat yx = y * x.adjoint();
  const ProjectorData pd = projector_data(e, reflect_lower(z2), reflect_upper(z1), z1, z2, o);
  const CVec w = pd.mw1.cwiseProduct(pd.mw2);
  if (pd.far || degenerate_coefficient(pd.eig, w)) {
    out.a = 0.0;
    out.a2 = rn * yx;
    out.fallback = true;
    return out;
  }
  const CVec v = y.cwiseProduct(x.conjugate());
  out.a = n * pd.eig.coefficient(w.cwiseProduct(v)) / pd.eig.coefficient(w);
  out.a2 = rn * yx;
  out.a2.diagonal().array() -= rn * out.a / n;
  return out;
}

ChainApprox chain_approx2(const EnsembleSpec& e, const CVec& m1, const CMat& b, const CVec& m2) {
  if (b.rows() != e.n || b.cols() != e.n)
    throw ValidationError("chain_approx2: dimension mismatch");
  ChainApprox out;
  out.order = 2;
  const CVec rhs = m1.cwiseProduct(b.diagonal()).cwiseProduct(m2);
  const DenseSolve sol = solve_dense(stability_matrix(e, m1, m2), rhs);
  if (!sol.x.allFinite()) throw NumericalError("chain_approx2: stability solve failed");
  out.value = m1.asDiagonal() * b * m2.asDiagonal();
  out.value.diagonal() = sol.x;
  out.condition = sol.condition;
  out.least_squares = sol.least_squares;
  return out;
}

ChainApprox chain_approx2(const EnsembleSpec& e, cplx z1, const CMat& b, cplx z2, double tol) {
  const CVec m1 = solve_vde(e, z1, tol).m;
  const CVec m2 = solve_vde(e, z2, tol).m;
  ChainApprox out = chain_approx2(e, m1, b, m2);
  out.spectral = {z1, z2};
  return out;
}

ChainApprox chain_approx3(const EnsembleSpec& e, cplx z1, const CMat& a1, cplx z2, const CMat& a2,
                          double tol) {
  const CVec m1 = solve_vde(e, z1, tol).m;
  const CVec m2 = solve_vde(e, z2, tol).m;
  const ChainApprox m12 = chain_approx2(e, m1, a1, m2);
  const ChainApprox m21 = chain_approx2(e, m2, a2, m1);
  CMat inner = a1;
  inner.diagonal() += e.apply_S(CVec(m12.value.diagonal()));
  const CMat x = m1.asDiagonal() * inner * m21.value;
  // (1 - M1 M1 S)^{-1}[X] = X_od + diag(B_{z1,z1}^{-1}[x_diag]); the chain starts and ends at z1.
  const DenseSolve sol = solve_dense(stability_matrix(e, m1, m1), x.diagonal());
  ChainApprox out;
  out.order = 3;
  out.spectral = {z1, z2, z1};
  out.value = x;
  out.value.diagonal() = sol.x;
  out.condition = std::max({sol.condition, m12.condition, m21.condition});
  out.least_squares = sol.least_squares || m12.least_squares || m21.least_squares;
  return out;
}

SaturatedF saturated_F(const EnsembleSpec& e, const CVec& m1, const CVec& m2) {
  const RVec q = m1.cwiseProduct(m2).cwiseAbs().cwiseSqrt();
  const RMat f = q.asDiagonal() * e.s * q.asDiagonal();
  Eigen::SelfAdjointEigenSolver<RMat> es(f);
  if (es.info() != Eigen::Success) throw NumericalError("saturated_F: eigensolver failed");
  const RVec& ev = es.eigenvalues();
  std::vector<double> sv(ev.data(), ev.data() + ev.size());
  for (double& v : sv) v = std::abs(v);
  std::sort(sv.begin(), sv.end(), std::greater<>());
  SaturatedF out;
  out.norm = sv[0];
  out.gap = sv.size() > 1 ? sv[0] - sv[1] : sv[0];
  Eigen::Index top = 0;
  ev.cwiseAbs().maxCoeff(&top);
  out.principal_vec = es.eigenvectors().col(top);
  if (out.principal_vec.sum() < 0) out.principal_vec = -out.principal_vec;
  return out;
}

SaturatedF saturated_F(const EnsembleSpec& e, cplx z1, cplx z2, double tol) {
  return saturated_F(e, solve_vde(e, z1, tol).m, solve_vde(e, z2, tol).m);
}

}  // namespace wtlab
