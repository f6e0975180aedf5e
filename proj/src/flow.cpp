#include "wtlab/flow.hpp"

#include <cmath>

#include "wtlab/io.hpp"

namespace wtlab {

CVec flow_map_from_m(const EnsembleSpec& e, cplx z, const CVec& m_z, double t, double T) {
  if (t == T) return CVec::Constant(e.n, z);
  const double g = std::exp((T - t) / 2);
  const double sh = 2 * std::sinh((T - t) / 2);
  CVec out = (g * z) * CVec::Ones(e.n) + (1 - g) * e.a.cast<cplx>() + sh * e.apply_S(m_z);
  return out;
}

CVec flow_map(const EnsembleSpec& e, cplx z, double t, double T, double tol) {
  if (!(t >= 0 && t <= T)) throw ValidationError("flow_map: need 0 <= t <= T");
  if (z.imag() == 0) throw ValidationError("flow_map: Im z must be nonzero");
  if (t == T) return CVec::Constant(e.n, z);
  const DysonSolution s = solve_vde(e, z, tol);
  return flow_map_from_m(e, z, s.m, t, T);
}

double verify_m_scaling(const EnsembleSpec& e, cplx z, double t, double T, double tol) {
  if (!(t >= 0 && t <= T)) throw ValidationError("verify_m_scaling: need 0 <= t <= T");
  const DysonSolution sz = solve_vde(e, z, tol);
  if (t == T) return 0.0;
  const CVec zt = flow_map_from_m(e, z, sz.m, t, T);
  const CVec predicted = std::exp((t - T) / 2) * sz.m;
  const DysonSolution st = solve_vde(e, zt, tol);
  return (st.m - predicted).cwiseAbs().maxCoeff();
}

CharTrajectory eta_profile(const EnsembleSpec& e, cplx z, double T, int samples, double tol) {
  if (samples < 2) throw ValidationError("eta_profile: need at least two samples");
  if (!(T > 0)) throw ValidationError("eta_profile: T must be positive");
  const DysonSolution sz = solve_vde(e, z, tol);
  CharTrajectory tr;
  tr.terminal_z = z;
  tr.T = T;
  tr.min_eta_ratio = std::numeric_limits<double>::infinity();
  tr.max_eta_ratio = 0.0;
  tr.max_comparability = 1.0;
  const double sgn = z.imag() > 0 ? 1.0 : -1.0;
  for (int i = 0; i < samples; ++i) {
    const double t = T * i / (samples - 1);
    CVec zt = flow_map_from_m(e, z, sz.m, t, T);
    const RVec im = sgn * zt.imag();
    if (im.minCoeff() <= 0) throw NumericalError("eta_profile: trajectory left the half-plane");
    const double eta = std::abs(zt.imag().mean());
    tr.max_comparability = std::max(tr.max_comparability, im.maxCoeff() / im.minCoeff());
    const double ratio = eta / (std::abs(z.imag()) + (T - t));
    tr.min_eta_ratio = std::min(tr.min_eta_ratio, ratio);
    tr.max_eta_ratio = std::max(tr.max_eta_ratio, ratio);
    tr.t.push_back(t);
    tr.z_of_t.push_back(std::move(zt));
    tr.eta_of_t.push_back(eta);
  }
  return tr;
}

void write_trajectory_csv(const CharTrajectory& tr, const std::string& path) {
  CsvWriter w(path, {"t", "re_min", "re_max", "im_min", "im_max", "eta_t"});
  for (std::size_t i = 0; i < tr.t.size(); ++i) {
    const CVec& z = tr.z_of_t[i];
    w.row({tr.t[i], z.real().minCoeff(), z.real().maxCoeff(), z.imag().minCoeff(),
           z.imag().maxCoeff(), tr.eta_of_t[i]});
  }
}

void validate_chart(const ConeChart& c) {
  if (!(c.aperture > 0 && c.aperture <= 0.25))
    throw ValidationError("cone chart: aperture must lie in (0, 1/4]");
  if (std::abs(c.tilt) > M_PI * c.aperture / 2 + 1e-15)
    throw ValidationError("cone chart: tilt must lie in [-pi gamma/2, pi gamma/2]");
  if (!(c.xi > 0)) throw ValidationError("cone chart: xi must be positive");
  if (c.vertex.imag() <= c.xi)
    throw ValidationError("cone chart: requires 0 < xi < Im z");
}

cplx psi(const ConeChart& c, cplx u) {
  if (u.imag() < 0) throw ValidationError("psi: requires Im u >= 0");
  cplx power = 0.0;
  if (u != cplx(0.0)) {
    double theta = std::arg(u);
    if (u.imag() == 0 && u.real() < 0) theta = M_PI;  // -x - 0i sits on the same side
    power = std::pow(std::abs(u), c.aperture) * std::exp(I_unit * (c.aperture * theta));
  }
  const cplx rot = std::exp(I_unit * c.tilt);
  const cplx open = std::exp(I_unit * (M_PI * (1 - c.aperture) / 2));
  return c.vertex + rot * (-I_unit * c.xi + open * power);
}

bool in_shifted_cone(const ConeChart& c, cplx zeta, double tol) {
  const cplx apex = c.vertex - I_unit * std::exp(I_unit * c.tilt) * c.xi;
  const cplx w = zeta - apex;
  const double s = c.vertex.imag() > 0 ? 1.0 : -1.0;
  const double lhs = s * (std::exp(-I_unit * c.tilt) * w).imag();
  return lhs >= std::cos(M_PI * c.aperture / 2) * std::abs(w) - tol * (1 + std::abs(w));
}

CMat generalized_resolvent(const CMat& h, const CVec& w) {
  CMat a = h;
  a.diagonal() -= w;
  return a.partialPivLu().inverse();
}

namespace {

CMat im_part(const CMat& g) { return (g - g.adjoint()) / cplx(0.0, 2.0); }

// Breakpoints 0, scale 10^-2, ..., 1 in the local variable, followed by the tail panel.
std::vector<double> local_breaks(double scale) {
  std::vector<double> b{0.0};
  double s = scale * 1e-2;
  while (s < 1.0) {
    b.push_back(s);
    s *= 10.0;
  }
  b.push_back(1.0);
  return b;
}

struct FlowEvaluator {
  const CMat& h;
  const EnsembleSpec& e;
  double t, T;
  CMat im_g(cplx w) const {
    CVec wt;
    if (t == T) {
      wt = CVec::Constant(h.rows(), w);
    } else {
      // the residual of 1/m + w - a + S m cannot drop below rounding of |w|
      const DysonSolution s = solve_vde(e, w, 1e-13 * std::max(1.0, std::abs(w)));
      wt = flow_map_from_m(e, w, s.m, t, T);
    }
    return im_part(generalized_resolvent(h, wt));
  }
};

// (1/pi) [ i pi F(0) + int_0^inf ((F(x) - F0)/(x - i eps) + (F(-x) - F0)/(-x - i eps)) dx ]
// evaluated in a local variable s with x = x_of_s(s); the tail s in [1, inf) uses s = 1/w.
CMat symmetric_reconstruction(const std::function<CMat(double)>& F, double eps,
                              const std::function<double(double)>& x_of_s,
                              const std::function<double(double)>& dx_ds, double scale,
                              const QuadratureOptions& quad, QuadratureInfo* info) {
  const CMat f0 = F(0.0);
  auto local = [&](double s) -> CMat {
    if (s == 0.0) return CMat::Zero(f0.rows(), f0.cols());
    const double x = x_of_s(s);
    const CMat fp = F(x) - f0;
    const CMat fm = F(-x) - f0;
    return (fp / cplx(x, -eps) + fm / cplx(-x, -eps)) * dx_ds(s);
  };
  QuadratureInfo i1, i2;
  const CMat near = integrate_panels(local, local_breaks(scale), quad, &i1);
  auto tail = [&](double w) -> CMat {
    if (w == 0.0) return CMat::Zero(f0.rows(), f0.cols());
    return local(1.0 / w) / (w * w);
  };
  const CMat far = integrate_panels(tail, {0.0, 1e-3, 1e-2, 0.1, 1.0}, quad, &i2);
  if (info) {
    info->error_estimate = i1.error_estimate + i2.error_estimate;
    info->evaluations = i1.evaluations + i2.evaluations + 1;
    info->intervals = i1.intervals + i2.intervals;
    info->converged = i1.converged && i2.converged;
  }
  return (cplx(0.0, M_PI) * f0 + near + far) / M_PI;
}

}  // namespace

IntegralRepr resolvent_integral_repr(const CMat& h, const EnsembleSpec& e, double t, double T,
                                     const ConeChart& chart, const QuadratureOptions& quad) {
  validate_chart(chart);
  if (h.rows() != e.n) throw ValidationError("resolvent_integral_repr: dimension mismatch");
  if (!(t >= 0 && t <= T)) throw ValidationError("resolvent_integral_repr: need 0 <= t <= T");
  FlowEvaluator ev{h, e, t, T};
  const double gamma = chart.aperture;
  const double eps = std::pow(chart.xi, 1.0 / gamma);
  auto F = [&](double x) { return ev.im_g(psi(chart, cplx(x, 0.0))); };
  auto x_of_s = [gamma](double s) { return std::pow(s, 1.0 / gamma); };
  auto dx_ds = [gamma](double s) { return std::pow(s, 1.0 / gamma - 1.0) / gamma; };
  IntegralRepr out;
  out.reconstruction = symmetric_reconstruction(F, eps, x_of_s, dx_ds, chart.xi, quad, &out.quad);
  out.direct = generalized_resolvent(h, t == T ? CVec(CVec::Constant(e.n, chart.vertex))
                                               : flow_map(e, chart.vertex, t, T));
  out.max_discrepancy = (out.reconstruction - out.direct).cwiseAbs().maxCoeff();
  return out;
}

IntegralRepr stieltjes_line_repr(const CMat& h, const EnsembleSpec& e, double t, double T, cplx z,
                                 double xi, const QuadratureOptions& quad) {
  if (!(xi > 0 && xi < z.imag())) throw ValidationError("stieltjes_line_repr: need 0 < xi < Im z");
  if (h.rows() != e.n) throw ValidationError("stieltjes_line_repr: dimension mismatch");
  FlowEvaluator ev{h, e, t, T};
  const double x0 = z.real();
  const double y0 = z.imag() - xi;
  auto F = [&](double s) { return ev.im_g(cplx(x0 + s, y0)); };
  auto x_of_s = [](double s) { return s; };
  auto dx_ds = [](double) { return 1.0; };
  IntegralRepr out;
  out.reconstruction = symmetric_reconstruction(F, xi, x_of_s, dx_ds, xi, quad, &out.quad);
  out.direct = generalized_resolvent(
      h, t == T ? CVec(CVec::Constant(e.n, z)) : flow_map(e, z, t, T));
  out.max_discrepancy = (out.reconstruction - out.direct).cwiseAbs().maxCoeff();
  return out;
}

double ward_inequality_check(const CMat& g, const CVec& z) {
  if (g.rows() != z.size()) throw ValidationError("ward_inequality_check: dimension mismatch");
  const double min_im = z.imag().cwiseAbs().minCoeff();
  if (!(min_im > 0)) throw ValidationError("ward_inequality_check: Im z must be nonzero");
  const double s = z.imag()[0] > 0 ? 1.0 : -1.0;
  CMat w = (s / min_im) * im_part(g) - g * g.adjoint();
  w = 0.5 * (w + w.adjoint()).eval();
  Eigen::SelfAdjointEigenSolver<CMat> es(w, Eigen::EigenvaluesOnly);
  return es.eigenvalues().minCoeff();
}

}  // namespace wtlab
