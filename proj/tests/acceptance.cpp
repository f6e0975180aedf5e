#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "wtlab/flow.hpp"
#include "wtlab/harness.hpp"

using namespace wtlab;

namespace {

// Tolerances, sample sizes and seeds for every criterion.
constexpr double kDysonResidual = 1e-12, kSemicircleTol = 1e-10;
constexpr double kRhoTol = 1e-6, kMassTol = 1e-4, kKsTol = 0.02;
constexpr int kKsN = 2000, kKsSamples = 20;
constexpr double kProjTol = 1e-8, kExplicitProjTol = 1e-4, kKappaTol = 1e-6, kSlopeRel = 0.05;
constexpr double kChainTol = 1e-10, kChainSE = 3.0;
constexpr int kChainN = 512, kChainSamples = 200;
constexpr double kReconRel = 1e-13, kRegResidual = 1e-8, kRegRatioMax = 5, kGenRatioMin = 50;
constexpr double kFlowTol = 1e-8, kEtaComparability = 10;
constexpr double kReprTol = 1e-6, kXiTol = 1e-7;
constexpr double kWardTol = -1e-10;
constexpr int kOuN = 64, kOuPaths = 1000;
constexpr double kOuDt = 1e-2, kOuSE = 3.0, kOuAggregateFraction = 0.01;
constexpr double kEthExponent = -0.5, kEthTol = 0.15, kCenteringTol = 1e-6;
constexpr int kEthSamples = 20;
constexpr double kRigidityMax = 50;
constexpr int kLawN = 1024, kLawSamples = 40;
constexpr double kLawExponent = -0.5, kLawTol = 0.2, kLawGap = 0.5;

ProfileSpec block_profile(Symmetry sym = Symmetry::ComplexHermitian) {
  ProfileSpec p;
  p.k = 2;
  p.a_blocks = {0.25, -0.25};
  p.s_blocks.resize(2, 2);
  p.s_blocks << 1.5, 0.5, 0.5, 1.0;
  p.t_blocks = sym == Symmetry::RealSymmetric ? CMat(p.s_blocks.cast<cplx>()) : CMat::Zero(2, 2);
  p.symmetry = sym;
  return p;
}

std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", x);
  return buf;
}

struct Outcome {
  bool pass = true;
  std::string detail;
  void require(bool ok, const std::string& what) {
    if (!ok) pass = false;
    if (!detail.empty()) detail += "; ";
    detail += what + (ok ? "" : " [!]");
  }
};

double max_abs(const CMat& x) { return x.cwiseAbs().maxCoeff(); }

double vde_residual_dense(const EnsembleSpec& e, cplx z, const CVec& m) {
  const CVec s = e.s.cast<cplx>() * m;
  double r = 0;
  for (int j = 0; j < e.n; ++j) r = std::max(r, std::abs(1.0 / m[j] + z - e.a[j] + s[j]));
  return r;
}

Outcome dyson_correctness() {
  Outcome o;
  const EnsembleSpec flat = build_ensemble(flat_profile(), 10);
  std::vector<cplx> probes = {cplx(0, 1), cplx(0, 2)};
  for (int i = 0; probes.size() < 50; ++i) {
    const double x = -2.4 + 4.8 * (i % 12) / 11.0;
    const double y = std::pow(10.0, -3.0 + 3.5 * (i / 12) / 3.0);
    probes.push_back(cplx(x, (i % 2 ? -1 : 1) * y));
  }
  double err = 0, res = 0;
  for (cplx z : probes) {
    const DysonSolution s = solve_vde(flat, z, 1e-13);
    err = std::max(err, (s.m - CVec::Constant(10, oracle::semicircle_m(z))).cwiseAbs().maxCoeff());
    res = std::max({res, s.residual, vde_residual_dense(flat, z, s.m)});
  }
  const cplx mi = solve_vde(flat, cplx(0, 1), 1e-13).m[0];
  const cplx m2i = solve_vde(flat, cplx(0, 2), 1e-13).m[0];
  o.require(err <= kSemicircleTol, "max |m - m_sc| over 50 probes " + fmt(err));
  o.require(std::abs(mi - cplx(0, 0.6180339887)) < 1e-10 && std::abs(m2i - cplx(0, 0.4142135624)) < 1e-10,
            "m(i), m(2i) closed forms");
  const EnsembleSpec e = build_ensemble(block_profile(), 60);
  for (cplx z : probes) {
    const DysonSolution s = solve_vde(e, z, 1e-13);
    res = std::max({res, s.residual, vde_residual_dense(e, z, s.m)});
  }
  o.require(res <= kDysonResidual, "max residual " + fmt(res));
  return o;
}

Outcome density_check() {
  Outcome o;
  const EnsembleSpec flat = build_ensemble(flat_profile(), 64);
  const DensityProfile d = density(flat, uniform_grid(-2.5, 2.5, 2001), 1e-4, 1e-13);
  const double r0 = d.rho_at(0.0), r1 = d.rho_at(1.0);
  o.require(std::abs(r0 - 1 / M_PI) <= kRhoTol, "rho(0) err " + fmt(std::abs(r0 - 1 / M_PI)));
  o.require(std::abs(r1 - std::sqrt(3.0) / (2 * M_PI)) <= kRhoTol,
            "rho(1) err " + fmt(std::abs(r1 - std::sqrt(3.0) / (2 * M_PI))));
  o.require(std::abs(d.total_mass - 1) <= kMassTol, "flat |mass-1| " + fmt(std::abs(d.total_mass - 1)));

  const EnsembleSpec e = build_ensemble(block_profile(Symmetry::RealSymmetric), kKsN);
  const DensityProfile ds = default_density(e);
  o.require(std::abs(ds.total_mass - 1) <= kMassTol, "structured |mass-1| " + fmt(std::abs(ds.total_mass - 1)));

  std::vector<double> cum(ds.energies.size(), 0.0);
  for (std::size_t i = 1; i < cum.size(); ++i)
    cum[i] = cum[i - 1] + 0.5 * (ds.rho[i] + ds.rho[i - 1]) * (ds.energies[i] - ds.energies[i - 1]);
  auto cdf = [&](double x) {
    if (x <= ds.energies.front()) return 0.0;
    if (x >= ds.energies.back()) return 1.0;
    const auto it = std::upper_bound(ds.energies.begin(), ds.energies.end(), x);
    const std::size_t i = it - ds.energies.begin();
    const double w = (x - ds.energies[i - 1]) / (ds.energies[i] - ds.energies[i - 1]);
    const double c = cum[i - 1] + w * (cum[i] - cum[i - 1]);
    return c / cum.back();
  };
  std::vector<double> eig;
  for (int s = 0; s < kKsSamples; ++s) {
    const RMat h = sample_matrix(e, stream_seed(2, kKsN, s)).real();
    Eigen::SelfAdjointEigenSolver<RMat> es(h, Eigen::EigenvaluesOnly);
    for (int j = 0; j < kKsN; ++j) eig.push_back(es.eigenvalues()[j]);
  }
  const double ks = oracle::ks_distance(eig, cdf);
  o.require(ks <= kKsTol, "KS distance " + fmt(ks));
  return o;
}

Outcome stability_data() {
  Outcome o;
  const EnsembleSpec e = build_ensemble(block_profile(), 80);
  double proj = 0;
  for (cplx z : {cplx(0.2, 0.01), cplx(-0.5, 0.001), cplx(0.6, 0.1)}) {
    const CVec m1 = solve_vde(e, z, 1e-13).m, m2 = solve_vde(e, std::conj(z), 1e-13).m;
    const CMat b = stability_matrix(e, m1, m2);
    const StabilityEig s = smallest_eig(b, 1e-13);
    const CMat pi = s.projector();
    proj = std::max({proj, max_abs(pi * pi - pi), max_abs(b * pi - s.beta * pi),
                     max_abs(pi * b - s.beta * pi)});
  }
  o.require(proj <= kProjTol, "projector residual " + fmt(proj));

  double ex = 0;
  for (double energy : {-0.5, 0.1, 0.8}) {
    const CVec m = solve_vde(e, cplx(energy, 1e-6), 1e-13).m;
    const StabilityEig s = smallest_eig(stability_matrix(e, CVec(m.conjugate()), m), 1e-13);
    ex = std::max(ex, max_abs(s.projector() - explicit_projector_real(m)));
  }
  o.require(ex <= kExplicitProjTol, "explicit projector " + fmt(ex));

  const EnsembleSpec flat = build_ensemble(flat_profile(), 16);
  const double k0 = kappa(flat, 0.0, 1e-13), k1 = kappa(flat, 1.0, 1e-13);
  o.require(std::abs(k0 - 2) <= kKappaTol && std::abs(k1 - std::sqrt(3.0)) <= kKappaTol,
            "kappa(0) " + fmt(k0) + ", kappa(1) " + fmt(k1));

  for (bool is_flat : {true, false}) {
    const EnsembleSpec g = build_ensemble(is_flat ? flat_profile() : block_profile(), 24);
    const double energy = is_flat ? 0.3 : 0.1, delta = 1e-3;
    const CVec m0 = m_on_axis(g, energy, 1e-4, 1e-13);
    const CVec md = m_on_axis(g, energy + delta, 1e-4, 1e-13);
    const double k = kappa_from_m(m0);
    const cplx b0 = smallest_eig(stability_matrix(g, CVec(m0.conjugate()), m0), 1e-13).beta;
    const cplx bd = smallest_eig(stability_matrix(g, CVec(md.conjugate()), m0), 1e-13).beta;
    const cplx slope = (bd - b0) / delta;
    const double rel = std::abs(slope - I_unit / k) / std::abs(I_unit / k);
    o.require(rel <= kSlopeRel, std::string(is_flat ? "flat" : "structured") + " slope rel err " + fmt(rel));
  }
  return o;
}

Outcome deterministic_chains() {
  Outcome o;
  const EnsembleSpec flat = build_ensemble(flat_profile(), 12);
  double err = 0;
  const std::vector<std::pair<cplx, cplx>> pairs = {
      {cplx(0, 1), cplx(0, 2)}, {cplx(0.3, 0.1), cplx(-0.2, -0.4)}, {cplx(1.1, 0.2), cplx(-0.7, 0.05)}};
  for (auto [z1, z2] : pairs) {
    const cplx m1 = oracle::semicircle_m(z1), m2 = oracle::semicircle_m(z2);
    const CMat v = chain_approx2(flat, z1, CMat::Identity(12, 12), z2).value;
    err = std::max(err, max_abs(v - (m1 * m2 / (1.0 - m1 * m2)) * CMat::Identity(12, 12)));
  }
  const cplx at_i = chain_approx2(flat, cplx(0, 1), CMat::Identity(12, 12), cplx(0, 2)).value(0, 0);
  o.require(err <= kChainTol, "flat closed form " + fmt(err));
  o.require(std::abs(at_i - (-0.20382)) < 5e-6, "value at (i,2i) " + fmt(at_i.real()));

  const int n = kChainN;
  const EnsembleSpec e = build_ensemble(block_profile(), n);
  const cplx z1(0.1, 0.3), z2(-0.2, -0.4);
  CMat b = CMat::Zero(n, n);
  for (int j = 0; j < n; ++j) {
    b(j, j) = std::cos(2 * M_PI * j / n);
    if (j + 1 < n) b(j, j + 1) = b(j + 1, j) = 0.5;
  }
  const CMat m = chain_approx2(e, z1, b, z2).value;
  const std::vector<int> rows = {0, 100, 300, 450}, cols = {0, 101, 300, 451};
  std::vector<cplx> sum(16, 0.0);
  std::vector<double> sum2(16, 0.0);
  for (int s = 0; s < kChainSamples; ++s) {
    const CMat h = sample_matrix(e, stream_seed(4, n, s));
    const Eigen::PartialPivLU<CMat> lu1(h - z1 * CMat::Identity(n, n));
    const Eigen::PartialPivLU<CMat> lu2(h - z2 * CMat::Identity(n, n));
    CMat er = CMat::Zero(n, 4), ec = CMat::Zero(n, 4);
    for (int q = 0; q < 4; ++q) {
      er(rows[q], q) = 1.0;
      ec(cols[q], q) = 1.0;
    }
    const CMat g1_rows = lu1.transpose().solve(er);  // columns are (G1^T e_j) = rows of G1
    const CMat g2_cols = lu2.solve(ec);
    const CMat val = g1_rows.transpose() * b * g2_cols;
    for (int p = 0; p < 4; ++p)
      for (int q = 0; q < 4; ++q) {
        sum[4 * p + q] += val(p, q);
        sum2[4 * p + q] += std::norm(val(p, q));
      }
  }
  double worst = 0;
  for (int p = 0; p < 4; ++p)
    for (int q = 0; q < 4; ++q) {
      const cplx mean = sum[4 * p + q] / double(kChainSamples);
      const double var = (sum2[4 * p + q] / kChainSamples - std::norm(mean)) * kChainSamples / (kChainSamples - 1);
      const double se = std::sqrt(var / kChainSamples);
      worst = std::max(worst, std::abs(mean - m(rows[p], cols[q])) / se);
    }
  o.require(worst <= kChainSE, "worst probe deviation " + fmt(worst) + " SE");
  return o;
}

Outcome regularization() {
  Outcome o;
  double recon = 0, resid = 0;
  std::mt19937_64 rng(12);
  std::normal_distribution<double> g;
  const int n = 40;
  const EnsembleSpec e = build_ensemble(block_profile(), n);
  CMat b(n, n);
  for (int j = 0; j < n; ++j)
    for (int k = 0; k < n; ++k) b(j, k) = cplx(g(rng), g(rng));
  b = (0.5 * (b + b.adjoint())).eval();
  const std::vector<std::pair<cplx, cplx>> pairs = {
      {cplx(0.1, 0.01), cplx(0.1, -0.01)}, {cplx(-0.4, 0.02), cplx(-0.3, 0.03)}, {cplx(0.5, 0.1), cplx(0.2, -0.05)}};
  for (auto [z1, z2] : pairs) {
    for (double t : {1.0, 0.5}) {
      const RegularDecomposition r = regularize(b, e, z1, z2, t, 1.0, 1e-13);
      const CMat back = r.regular_part + r.scalar_part * CMat(r.direction.asDiagonal());
      recon = std::max(recon, max_abs(back - b) / max_abs(b));
      resid = std::max({resid, r.residual, regularity_residual(r.regular_part, e, z2, z1, 1e-13)});
    }
    const SDecomposition d = decompose_S(e, z1, z2, 1e-13);
    const CMat ns = double(n) * e.s.cast<cplx>();
    recon = std::max(recon, max_abs(d.s_ring + d.s_vec * CVec::Ones(n).transpose() - ns) / max_abs(ns));
    resid = std::max(resid, d.max_row_residual);
    const CVec x = CVec::Random(n), y = CVec::Random(n);
    const IsotropicObservable iso = isotropic_observable(x, y, e, z1, z2);
    const CMat target = double(n) * y * x.adjoint();
    recon = std::max(recon, max_abs(std::sqrt(double(n)) * iso.a2 + iso.a * CMat::Identity(n, n) - target) /
                                max_abs(target));
    resid = std::max(resid, regularity_residual(iso.a2, e, z2, z1, 1e-13));
  }
  o.require(recon <= kReconRel, "reconstruction rel err " + fmt(recon));
  o.require(resid <= kRegResidual, "regularity residual " + fmt(resid));

  const int nf = 64;
  const EnsembleSpec flat = build_ensemble(flat_profile(), nf);
  const cplx z(0.0, 1e-3);
  double reg = 0;
  for (const char* name : {"sign", "cosine", "point:0.3"}) {
    CMat a = make_observable(parse_observable(name), nf);
    if (std::string(name) == "cosine") a += 0.5 * CMat::Identity(nf, nf);
    const CMat ar = regularize(a, flat, z, std::conj(z), 1, 1, 1e-13).regular_part;
    reg = std::max(reg, hs_norm(chain_approx2(flat, std::conj(z), ar, z).value) / hs_norm(a));
  }
  const CMat id = CMat::Identity(nf, nf);
  const double gen = hs_norm(chain_approx2(flat, std::conj(z), id, z).value);
  o.require(reg <= kRegRatioMax, "regular ratio " + fmt(reg));
  o.require(gen > kGenRatioMin, "identity ratio " + fmt(gen));
  return o;
}

Outcome flow_identities() {
  Outcome o;
  const EnsembleSpec e = build_ensemble(block_profile(), 6);
  const std::vector<cplx> zs = {cplx(0.1, 1e-3), cplx(-0.6, 0.05), cplx(0.4, -0.2), cplx(1.0, 0.3)};
  double ode = 0;
  for (cplx z : zs)
    for (double t : {0.0, 0.5}) {
      CVec warm = solve_vde(e, z, 1e-14).m;
      auto rhs = [&](double, const CVec& zt) -> CVec {
        DysonOptions opt;
        opt.warm_start = &warm;
        const DysonSolution s = solve_vde(e, zt, 1e-14, opt);
        warm = s.m;
        return -e.apply_S(s.m) - 0.5 * (zt - e.a.cast<cplx>());
      };
      const CVec num = oracle::rk4(rhs, 1.0, t, CVec(CVec::Constant(e.n, z)),
                                   static_cast<int>(std::lround((1.0 - t) / 1e-3)));
      ode = std::max(ode, (num - flow_map(e, z, t, 1.0)).cwiseAbs().maxCoeff());
    }
  o.require(ode <= kFlowTol, "explicit vs RK4 " + fmt(ode));

  const EnsembleSpec e40 = build_ensemble(block_profile(), 40);
  double ms = 0;
  for (cplx z : zs)
    for (double t : {0.0, 0.25, 0.5, 0.75, 1.0}) ms = std::max(ms, verify_m_scaling(e40, z, t, 1.0, 1e-13));
  o.require(ms <= kFlowTol, "m scaling " + fmt(ms));

  double lo = 1e300, hi = 0;
  for (cplx z : zs) {
    const CharTrajectory tr = eta_profile(e40, z, 1.0, 101);
    lo = std::min(lo, tr.min_eta_ratio);
    hi = std::max({hi, tr.max_eta_ratio, tr.max_comparability});
  }
  o.require(lo >= 1 / kEtaComparability && hi <= kEtaComparability,
            "eta ratios in [" + fmt(lo) + ", " + fmt(hi) + "]");

  double psi_err = 0;
  for (double gamma : {0.25, 0.1})
    for (double omega : {0.0, 0.1})
      for (cplx v : {cplx(0.1, 0.2), cplx(-1.0, 0.5)}) {
        ConeChart c;
        c.vertex = v;
        c.aperture = gamma;
        c.tilt = omega * gamma;
        c.xi = 1e-8;
        psi_err = std::max(psi_err, std::abs(psi(c, I_unit * std::pow(c.xi, 1 / gamma)) - v) / std::abs(v));
      }
  o.require(psi_err <= 4 * std::numeric_limits<double>::epsilon(), "psi(i xi^{1/gamma}) rel err " + fmt(psi_err));
  return o;
}

Outcome integral_representation() {
  Outcome o;
  double rec = 0, line = 0, xi = 0;
  for (int n : {1, 8, 64}) {
    const EnsembleSpec e = build_ensemble(n == 1 ? flat_profile() : block_profile(), n);
    const CMat h = n == 1 ? CMat::Zero(1, 1) : sample_matrix(e, 50 + n);
    const cplx z = n == 1 ? I_unit : cplx(0.1, 0.2);
    for (double t : {1.0, 0.5}) {
      if (n == 64 && t < 1.0) continue;
      ConeChart c;
      c.vertex = z;
      const IntegralRepr r = resolvent_integral_repr(h, e, t, 1.0, c);
      CMat direct = h;
      direct.diagonal() -= t == 1.0 ? CVec(CVec::Constant(n, z)) : flow_map(e, z, t, 1.0);
      rec = std::max(rec, max_abs(r.reconstruction - direct.inverse()));
      const IntegralRepr l = stieltjes_line_repr(h, e, t, 1.0, z, 1e-8);
      line = std::max(line, max_abs(l.reconstruction - r.reconstruction));
      ConeChart c10 = c;
      c10.xi /= 10;
      xi = std::max(xi, max_abs(resolvent_integral_repr(h, e, t, 1.0, c10).reconstruction - r.reconstruction));
    }
  }
  o.require(rec <= kReprTol, "reconstruction " + fmt(rec));
  o.require(line <= kReprTol, "line variant " + fmt(line));
  o.require(xi <= kXiTol, "xi vs xi/10 " + fmt(xi));
  return o;
}

Outcome ward() {
  Outcome o;
  const EnsembleSpec e = build_ensemble(block_profile(), 24);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> re(-1.5, 1.5), im(0.005, 1.0), tt(0.0, 1.0);
  double worst = 1e300;
  for (int i = 0; i < 100; ++i) {
    const CMat h = sample_matrix(e, stream_seed(6, 24, i));
    const double sgn = i % 4 < 2 ? 1.0 : -1.0;
    CVec z(24);
    if (i % 2 == 0) {
      z = flow_map(e, cplx(re(rng), sgn * im(rng)), tt(rng), 1.0);
    } else {
      for (int j = 0; j < 24; ++j) z[j] = cplx(re(rng), sgn * im(rng));
    }
    worst = std::min(worst, ward_inequality_check(generalized_resolvent(h, z), z));
  }
  o.require(worst >= kWardTol, "min eigenvalue " + fmt(worst));
  return o;
}

Outcome ou_moments() {
  Outcome o;
  const int n = kOuN;
  const EnsembleSpec e = build_ensemble(block_profile(), n);
  const int steps = static_cast<int>(std::lround(1.0 / kOuDt));
  CMat sum = CMat::Zero(n, n);
  RMat sum2 = RMat::Zero(n, n), sum4 = RMat::Zero(n, n);
  for (int p = 0; p < kOuPaths; ++p) {
    CMat h = sample_matrix(e, stream_seed(10, n, p));
    for (int s = 0; s < steps; ++s) h = ou_step(h, e, kOuDt, stream_seed(11 + s, n, p));
    CMat c = h;
    c.diagonal() -= e.a.cast<cplx>();
    sum += h;
    const RMat sq = c.cwiseAbs2();
    sum2 += sq;
    sum4 += sq.cwiseProduct(sq);
  }
  const double paths = kOuPaths;
  auto mean_z = [&](int j, int k) {
    return std::abs(sum(j, k) / paths - e.a[j] * double(j == k)) / std::sqrt(e.s(j, k) / paths);
  };
  auto var_z = [&](int j, int k) {
    const double m2 = sum2(j, k) / paths;
    const double v = (sum4(j, k) / paths - m2 * m2) * paths / (paths - 1);
    return std::abs(m2 - e.s(j, k)) / std::sqrt(v / paths);
  };
  const std::vector<std::pair<int, int>> probes = {{0, 0},  {1, 1},   {31, 31}, {63, 63}, {0, 1},   {0, 63},
                                                   {5, 40}, {10, 20}, {17, 3},  {30, 31}, {32, 33}, {40, 60},
                                                   {50, 2}, {62, 1},  {20, 45}, {33, 34}};
  double worst = 0;
  for (auto [j, k] : probes) worst = std::max({worst, mean_z(j, k), var_z(j, k)});
  o.require(worst <= kOuSE, "probe set worst " + fmt(worst) + " SE");
  int outside = 0, total = 0;
  for (int j = 0; j < n; ++j)
    for (int k = j; k < n; ++k) {
      outside += (mean_z(j, k) > kOuSE) + (var_z(j, k) > kOuSE);
      total += 2;
    }
  const double frac = double(outside) / total;
  o.require(frac <= kOuAggregateFraction, "fraction beyond 3 SE " + fmt(frac));
  return o;
}

std::vector<OverlapReport> eth_reports;

Outcome eth_scaling() {
  Outcome o;
  eth_reports.clear();
  for (bool flat : {true, false}) {
    const OverlapReport r = eth_overlaps(flat ? flat_profile() : block_profile(), parse_observable("sign"),
                                         {128, 256, 512, 1024}, kEthSamples, 0.2, flat ? 21 : 22);
    eth_reports.push_back(r);
    const std::string tag = flat ? "flat" : "2-block";
    o.require(std::abs(r.fit.exponent - kEthExponent) <= kEthTol,
              tag + " exponent " + fmt(r.fit.exponent) + " (ci " + fmt(r.fit.ci_low) + ".." + fmt(r.fit.ci_high) + ")");
    if (flat) {
      double spread = 0;
      for (const OverlapRow& row : r.per_n) spread = std::max(spread, row.centering_spread);
      o.require(spread <= kCenteringTol, "flat centering spread " + fmt(spread));
    }
  }
  return o;
}

Outcome rigidity() {
  Outcome o;
  if (eth_reports.empty()) eth_scaling();
  double worst = 0;
  for (const OverlapReport& r : eth_reports)
    for (const OverlapRow& row : r.per_n) worst = std::max(worst, row.median_rigidity);
  o.require(worst <= kRigidityMax, "max median N|lambda - gamma| " + fmt(worst));
  return o;
}

Outcome two_resolvent_law() {
  Outcome o;
  const EnsembleSpec e = build_ensemble(flat_profile(), kLawN);
  const ObservableSpec point = parse_observable("point:0.5"), id = parse_observable("identity");
  const EtaSweep sw = eta_sweep(e, 0.0, 0.0, {{point, point, true}, {id, id, false}},
                                {0.2, 0.1, 0.05, 0.025, 0.0125}, kLawSamples, 23);
  const double reg = sw.fits[0].exponent, irr = sw.fits[1].exponent;
  o.require(std::abs(reg - kLawExponent) <= kLawTol, "regular exponent " + fmt(reg));
  o.require(irr <= reg - kLawGap, "irregular exponent " + fmt(irr));
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"Dyson correctness", dyson_correctness},
      {"Density", density_check},
      {"Stability spectral data", stability_data},
      {"Deterministic chains", deterministic_chains},
      {"Regularization calculus", regularization},
      {"Flow identities", flow_identities},
      {"Integral representation", integral_representation},
      {"Ward inequality", ward},
      {"OU moment preservation", ou_moments},
      {"ETH scaling", eth_scaling},
      {"Rigidity", rigidity},
      {"Two-resolvent local law scaling", two_resolvent_law},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(id)) continue;
    const auto start = std::chrono::steady_clock::now();
    Outcome r;
    try {
      r = criteria[i].second();
    } catch (const std::exception& ex) {
      r.pass = false;
      r.detail = std::string("exception: ") + ex.what();
    }
    const double sec = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    failed += !r.pass;
    std::cout << (r.pass ? "PASS" : "FAIL") << " [" << id << "] " << criteria[i].first << ": " << r.detail
              << " (" << fmt(sec) << " s)" << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
