#include "wtlab/harness.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>

#include "wtlab/kernels.hpp"

namespace wtlab {

ObservableSpec parse_observable(const std::string& name) {
  ObservableSpec s;
  using K = ObservableSpec::Kind;
  if (name == "sign") {
    s.kind = K::Sign;
  } else if (name == "identity") {
    s.kind = K::Identity;
  } else if (name == "cosine") {
    s.kind = K::Cosine;
  } else if (name == "zero") {
    s.kind = K::Zero;
  } else if (name.rfind("point", 0) == 0) {
    s.kind = K::Point;
    if (name.size() > 5) {
      if (name[5] != ':') throw ValidationError("unknown observable '" + name + "'");
      s.x0 = std::stod(name.substr(6));
    }
    if (!(s.x0 >= 0 && s.x0 < 1)) throw ValidationError("point observable: x0 must lie in [0,1)");
  } else {
    throw ValidationError("unknown observable '" + name + "'");
  }
  return s;
}

std::string observable_name(const ObservableSpec& spec) {
  using K = ObservableSpec::Kind;
  switch (spec.kind) {
    case K::Sign: return "sign";
    case K::Identity: return "identity";
    case K::Cosine: return "cosine";
    case K::Zero: return "zero";
    case K::Point: return "point:" + std::to_string(spec.x0);
  }
  return "?";
}

CMat make_observable(const ObservableSpec& spec, int n) {
  if (n <= 0) throw ValidationError("make_observable: n must be positive");
  using K = ObservableSpec::Kind;
  CMat a = CMat::Zero(n, n);
  switch (spec.kind) {
    case K::Sign:
      for (int j = 0; j < n; ++j) a(j, j) = (double(j) / n < 0.5) ? 1.0 : -1.0;
      break;
    case K::Identity:
      a.diagonal().setOnes();
      break;
    case K::Cosine:
      for (int j = 0; j < n; ++j) a(j, j) = std::cos(2 * M_PI * double(j) / n);
      break;
    case K::Point: {
      const int p = std::min(n - 1, static_cast<int>(std::floor(spec.x0 * n)));
      a(p, p) = std::sqrt(static_cast<double>(n));
      break;
    }
    case K::Zero:
      break;
  }
  return a;
}

namespace {

void check_one_signed(const CVec& z, const char* who) {
  const bool up = z[0].imag() > 0;
  for (Eigen::Index j = 0; j < z.size(); ++j) {
    const double y = z[j].imag();
    if (y == 0 || (y > 0) != up)
      throw ValidationError(std::string(who) + ": Im z must be nonzero and one-signed");
  }
}

bool is_diagonal(const CMat& a) {
  for (Eigen::Index k = 0; k < a.cols(); ++k)
    for (Eigen::Index j = 0; j < a.rows(); ++j)
      if (j != k && a(j, k) != cplx(0.0)) return false;
  return true;
}

bool is_real(const CMat& a) { return a.imag().cwiseAbs().maxCoeff() == 0.0; }

double op_norm(const CMat& a) {
  if (a.rows() == 0) return 0.0;
  if (is_diagonal(a)) return a.diagonal().cwiseAbs().maxCoeff();
  Eigen::BDCSVD<CMat> svd(a);
  return svd.singularValues()[0];
}

// <X Y> = (1/N) sum_jk X_jk Y_kj
cplx trace_product(const CMat& x, const CMat& y) {
  return x.cwiseProduct(y.transpose()).sum() / static_cast<double>(x.rows());
}

void check_domain(double eta, int n, double eps, const char* who) {
  const double floor = std::pow(double(n), -1.0 + eps);
  if (eta < floor)
    throw ValidationError(std::string(who) + ": eta = " + std::to_string(eta) +
                          " is below the bulk-domain scale N^{-1+eps} = " + std::to_string(floor));
}

void check_spectrum(const CMat& h, const Spectrum& sp) {
  const double scale = std::max(1.0, h.cwiseAbs().maxCoeff());
  const CMat rec = sp.u * sp.lambda.cast<cplx>().asDiagonal() * sp.u.adjoint();
  if ((rec - h).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw NumericalError("eigendecomposition reconstruction check failed");
  CMat gram = sp.u.adjoint() * sp.u;
  gram.diagonal().array() -= 1.0;
  if (gram.cwiseAbs().maxCoeff() > 1e-12)
    throw NumericalError("eigenvector orthonormality check failed");
}

// One resolvent column from the eigendecomposition against the defining equation.
void check_resolvent_column(const CMat& h, const Spectrum& sp, cplx z) {
  const Eigen::Index n = h.rows();
  CVec coef = sp.u.row(0).adjoint();
  for (Eigen::Index j = 0; j < n; ++j) coef[j] /= (sp.lambda[j] - z);
  const CVec g = sp.u * coef;
  CVec r = h * g - z * g;
  r[0] -= 1.0;
  if (r.cwiseAbs().maxCoeff() > 1e-12 * std::max(1.0, 1.0 / std::abs(z.imag())))
    throw NumericalError("resolvent residual check failed");
}

double sample_median_guard(const std::vector<double>& v) {
  for (double x : v)
    if (!std::isfinite(x)) throw NumericalError("non-finite Monte Carlo statistic");
  return median(v);
}

}  // namespace

double median(std::vector<double> v) {
  if (v.empty()) throw ValidationError("median of an empty sample");
  std::sort(v.begin(), v.end());
  const std::size_t m = v.size() / 2;
  return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

CMat resolvent(const CMat& h, const CVec& z) {
  if (h.rows() != h.cols() || h.rows() != z.size())
    throw ValidationError("resolvent: dimension mismatch");
  check_one_signed(z, "resolvent");
  CMat a = h;
  a.diagonal() -= z;
  Eigen::PartialPivLU<CMat> lu(a);
  CMat g = lu.solve(CMat::Identity(h.rows(), h.cols()));
  if (!g.allFinite()) throw NumericalError("resolvent: singular solve");
  return g;
}

CMat resolvent(const CMat& h, cplx z) { return resolvent(h, CVec(CVec::Constant(h.rows(), z))); }

double resolvent_residual(const CMat& h, const CVec& z, const CMat& g) {
  CMat r = h * g - z.asDiagonal() * g;
  r.diagonal().array() -= 1.0;
  return r.cwiseAbs().maxCoeff();
}

Spectrum spectrum(const CMat& h, Symmetry sym) {
  Spectrum sp;
  if (sym == Symmetry::RealSymmetric) {
    Eigen::SelfAdjointEigenSolver<RMat> es(h.real());
    if (es.info() != Eigen::Success) throw NumericalError("spectrum: eigensolver failed");
    sp.lambda = es.eigenvalues();
    sp.u = es.eigenvectors().cast<cplx>();
  } else {
    Eigen::SelfAdjointEigenSolver<CMat> es(h);
    if (es.info() != Eigen::Success) throw NumericalError("spectrum: eigensolver failed");
    sp.lambda = es.eigenvalues();
    sp.u = es.eigenvectors();
  }
  return sp;
}

CMat to_eigenbasis(const Spectrum& sp, const CMat& a) {
  const Eigen::Index n = a.rows();
  if (is_diagonal(a)) {
    const CVec d = a.diagonal();
    if ((d.array() - d[0]).abs().maxCoeff() == 0.0) return a;
    std::vector<Eigen::Index> nz;
    for (Eigen::Index j = 0; j < n; ++j)
      if (d[j] != cplx(0.0)) nz.push_back(j);
    if (static_cast<Eigen::Index>(nz.size()) * 8 <= n) {
      CMat out = CMat::Zero(n, n);
      for (Eigen::Index p : nz) {
        const CVec row = sp.u.row(p).transpose();
        out.noalias() += d[p] * row.conjugate() * row.transpose();
      }
      return out;
    }
    if (is_real(sp.u) && is_real(a)) {
      const RMat ur = sp.u.real();
      const RMat scaled = d.real().asDiagonal() * ur;
      return (ur.transpose() * scaled).cast<cplx>();
    }
    return sp.u.adjoint() * (d.asDiagonal() * sp.u);
  }
  return sp.u.adjoint() * a * sp.u;
}

LocalLawStats phi_stats(const EnsembleSpec& e, cplx z1, cplx z2, const CMat& a1, const CMat& a2,
                        int samples, std::uint64_t seed, const HarnessOptions& opt) {
  const int n = e.n;
  if (a1.rows() != n || a1.cols() != n || a2.rows() != n || a2.cols() != n)
    throw ValidationError("phi_stats: observable dimension mismatch");
  if (samples < 1) throw ValidationError("phi_stats: samples must be positive");
  if (z1.imag() == 0 || z2.imag() == 0) throw ValidationError("phi_stats: Im z must be nonzero");
  const double eta = std::min(std::abs(z1.imag()), std::abs(z2.imag()));
  check_domain(eta, n, opt.domain_eps, "phi_stats");

  const CVec m1 = solve_vde(e, z1, opt.dyson_tol).m;
  const CVec m2 = solve_vde(e, z2, opt.dyson_tol).m;
  const CMat m12 = chain_approx2(e, m1, a1, m2).value;
  const cplx det2 = trace_product(m12, a2);
  const cplx det1 = m1.cwiseProduct(a1.diagonal()).mean();
  const double hs1 = hs_norm(a1), hs2 = hs_norm(a2), op2 = op_norm(a2);

  LocalLawStats st;
  st.n = n;
  st.z1 = z1;
  st.z2 = z2;
  st.samples = samples;
  st.seed = seed;
  st.regularity_a1 = regularity_residual(a1, e, z1, z2, opt.dyson_tol);
  st.regularity_a2 = regularity_residual(a2, e, z2, z1, opt.dyson_tol);

  std::vector<cplx> t1(samples), t2(samples);
  kernels::for_each_index(
      samples,
      [&](int i) {
        const CMat h = sample_matrix(e, stream_seed(seed, n, i), opt.law);
        const Spectrum sp = spectrum(h, e.symmetry);
        if (i == 0) {
          check_spectrum(h, sp);
          check_resolvent_column(h, sp, z1);
        }
        const CMat a1t = to_eigenbasis(sp, a1);
        const CMat a2t = to_eigenbasis(sp, a2);
        t2[i] = kernels::chain_trace2(sp.lambda, a1t, a2t, z1, z2, Exec::Serial) - det2;
        t1[i] = kernels::chain_trace1(sp.lambda, a1t, z1, Exec::Serial) - det1;
      },
      opt.exec);

  const double sn = std::sqrt(static_cast<double>(n) * eta);
  for (int i = 0; i < samples; ++i) {
    const double r1 = std::abs(t1[i]), r2 = std::abs(t2[i]);
    st.raw1.push_back(r1);
    st.raw2.push_back(r2);
    st.phi1.push_back(hs1 > 0 ? n * std::sqrt(eta) * r1 / hs1 : 0.0);
    st.phi2_hs.push_back(hs1 > 0 && hs2 > 0 ? sn * r2 / (hs1 * hs2) : 0.0);
    st.phi2_op.push_back(hs1 > 0 && op2 > 0 ? sn * r2 / (hs1 * op2) : 0.0);
    st.phi11.push_back(hs1 > 0 && op2 > 0 ? sn * std::sqrt(eta) * r2 / (hs1 * op2) : 0.0);
  }
  return st;
}

ScalingFit fit_exponent(const std::vector<std::pair<double, double>>& xy) {
  if (xy.size() < 3) throw ValidationError("fit_exponent: at least 3 points required");
  ScalingFit f;
  for (const auto& [x, y] : xy) {
    if (!(x > 0) || !(y > 0)) throw ValidationError("fit_exponent: nonpositive values");
    f.points.emplace_back(std::log(x), std::log(y));
  }
  const double k = static_cast<double>(f.points.size());
  double mx = 0, my = 0;
  for (const auto& [lx, ly] : f.points) {
    mx += lx;
    my += ly;
  }
  mx /= k;
  my /= k;
  double sxx = 0, sxy = 0, syy = 0;
  for (const auto& [lx, ly] : f.points) {
    sxx += (lx - mx) * (lx - mx);
    sxy += (lx - mx) * (ly - my);
    syy += (ly - my) * (ly - my);
  }
  if (!(sxx > 1e-24 * k)) throw ValidationError("fit_exponent: degenerate x-range");
  f.exponent = sxy / sxx;
  f.intercept = my - f.exponent * mx;
  double ssr = 0;
  for (const auto& [lx, ly] : f.points) {
    const double r = ly - (f.intercept + f.exponent * lx);
    ssr += r * r;
  }
  f.stderr_ = std::sqrt(ssr / (k - 2) / sxx);
  f.r_squared = syy > 0 ? 1.0 - ssr / syy : 1.0;
  const boost::math::students_t dist(k - 2);
  const double q = boost::math::quantile(boost::math::complement(dist, 0.025));
  f.ci_low = f.exponent - q * f.stderr_;
  f.ci_high = f.exponent + q * f.stderr_;
  return f;
}

DensityProfile default_density(const EnsembleSpec& e, const HarnessOptions& opt) {
  const double row = e.s.rowwise().sum().maxCoeff();
  const double reach = 2.0 * std::sqrt(row) + 0.1;
  const double lo = e.a.minCoeff() - reach, hi = e.a.maxCoeff() + reach;
  return density(e, uniform_grid(lo, hi, opt.density_points), opt.eta_floor, opt.dyson_tol);
}

RVec eth_centering(const EnsembleSpec& e, const DensityProfile& d, const std::vector<int>& bulk,
                   const CMat& b, const HarnessOptions& opt) {
  RVec c = RVec::Zero(e.n);
  const RVec bd = b.diagonal().real();
  CVec warm;
  bool have = false;
  for (int j : bulk) {
    CVec next;
    const CVec m = m_on_axis(e, d.quantiles[j], opt.eta_floor, opt.dyson_tol,
                             have ? &warm : nullptr, &next);
    warm = next;
    have = true;
    const RVec im = m.imag();
    const double mass = im.sum();
    if (!(mass > 0)) throw NumericalError("eth_centering: vanishing density at a bulk quantile");
    c[j] = im.dot(bd) / mass;
  }
  return c;
}

OverlapReport eth_overlaps(const ProfileSpec& family, const ObservableSpec& b_spec,
                           const std::vector<int>& n_list, int samples, double rho_min,
                           std::uint64_t seed, const HarnessOptions& opt) {
  if (n_list.empty()) throw ValidationError("eth_overlaps: n_list must be nonempty");
  for (std::size_t i = 1; i < n_list.size(); ++i)
    if (!(n_list[i] > n_list[i - 1])) throw ValidationError("eth_overlaps: n_list must ascend");
  if (samples < 1) throw ValidationError("eth_overlaps: samples must be positive");
  OverlapReport rep;
  std::vector<std::pair<double, double>> pts;
  for (int n : n_list) {
    const EnsembleSpec e = build_ensemble(family, n);
    const DensityProfile d = default_density(e, opt);
    SpectralDomain dom;
    dom.rho_star = rho_min;
    const std::vector<int> bulk = bulk_indices(d, dom);
    if (bulk.empty()) throw ValidationError("eth_overlaps: empty bulk index set");
    const CMat b = make_observable(b_spec, n);
    const RVec c = eth_centering(e, d, bulk, b, opt);
    const double hs = hs_norm(b);
    const double mean_b = b.diagonal().real().mean();

    OverlapRow row;
    row.n = n;
    row.bulk_size = static_cast<int>(bulk.size());
    for (int j : bulk) row.centering_spread = std::max(row.centering_spread, std::abs(c[j] - mean_b));

    std::vector<double> gam, cg;
    for (int j : bulk) {
      gam.push_back(d.quantiles[j]);
      cg.push_back(c[j]);
    }
    auto c_at = [&](double x) {
      if (gam.size() == 1 || x <= gam.front()) return cg.front();
      if (x >= gam.back()) return cg.back();
      const auto it = std::upper_bound(gam.begin(), gam.end(), x);
      const std::size_t k = it - gam.begin();
      const double w = (x - gam[k - 1]) / (gam[k] - gam[k - 1]);
      return (1 - w) * cg[k - 1] + w * cg[k];
    };

    std::vector<double> dev(samples), rig(samples), devl(samples);
    kernels::for_each_index(
        samples,
        [&](int i) {
          const CMat h = sample_matrix(e, stream_seed(seed, n, i), opt.law);
          const Spectrum sp = spectrum(h, e.symmetry);
          if (i == 0) check_spectrum(h, sp);
          const CMat bt = to_eigenbasis(sp, b);
          dev[i] = kernels::max_overlap_deviation(bt, c, bulk, Exec::Serial);
          RVec cl = RVec::Zero(n);
          double r = 0.0;
          for (int j : bulk) {
            cl[j] = c_at(sp.lambda[j]);
            r = std::max(r, n * std::abs(sp.lambda[j] - d.quantiles[j]));
          }
          rig[i] = r;
          devl[i] = kernels::max_overlap_deviation(bt, cl, bulk, Exec::Serial);
        },
        opt.exec);
    row.deviations = dev;
    row.rigidity = rig;
    row.median_deviation = sample_median_guard(dev);
    row.median_scaled = hs > 0 ? std::sqrt(double(n)) * row.median_deviation / hs : 0.0;
    row.median_rigidity = sample_median_guard(rig);
    row.max_rigidity = *std::max_element(rig.begin(), rig.end());
    row.median_deviation_lambda = sample_median_guard(devl);
    pts.emplace_back(n, row.median_deviation);
    rep.per_n.push_back(std::move(row));
  }
  if (pts.size() >= 3) rep.fit = fit_exponent(pts);
  return rep;
}

SizeSweep single_resolvent_law(const ProfileSpec& family, cplx z, const ObservableSpec& a_spec,
                               bool regularize_observable, const std::vector<int>& n_list,
                               int samples, std::uint64_t seed, const HarnessOptions& opt) {
  if (z.imag() == 0) throw ValidationError("single_resolvent_law: Im z must be nonzero");
  if (samples < 1) throw ValidationError("single_resolvent_law: samples must be positive");
  SizeSweep out;
  std::vector<std::pair<double, double>> pts;
  for (int n : n_list) {
    check_domain(std::abs(z.imag()), n, opt.domain_eps, "single_resolvent_law");
    const EnsembleSpec e = build_ensemble(family, n);
    CMat a = make_observable(a_spec, n);
    if (regularize_observable)
      a = regularize(a, e, z, std::conj(z), 0.0, 0.0, opt.dyson_tol).regular_part;
    const CVec m = solve_vde(e, z, opt.dyson_tol).m;
    const cplx det = m.cwiseProduct(a.diagonal()).mean();
    std::vector<double> vals(samples);
    kernels::for_each_index(
        samples,
        [&](int i) {
          const CMat h = sample_matrix(e, stream_seed(seed, n, i), opt.law);
          const Spectrum sp = spectrum(h, e.symmetry);
          if (i == 0) check_resolvent_column(h, sp, z);
          CVec diag;
          if (is_diagonal(a))
            diag = sp.u.cwiseAbs2().transpose().cast<cplx>() * a.diagonal();
          else
            diag = (sp.u.adjoint() * a * sp.u).diagonal();
          cplx tr = 0.0;
          for (int j = 0; j < n; ++j) tr += diag[j] / (sp.lambda[j] - z);
          vals[i] = std::abs(tr / double(n) - det);
        },
        opt.exec);
    const double med = sample_median_guard(vals);
    out.n_list.push_back(n);
    out.medians.push_back(med);
    pts.emplace_back(n, med);
  }
  for (double m : out.medians)
    if (!(m > 0)) throw DegenerateDataError("single_resolvent_law: degenerate data (zero medians)");
  out.fit = fit_exponent(pts);
  return out;
}

EtaSweep eta_sweep(const EnsembleSpec& e, double e1, double e2,
                   const std::vector<ObservablePair>& pairs, const std::vector<double>& eta_list,
                   int samples, std::uint64_t seed, const HarnessOptions& opt) {
  const int n = e.n;
  if (pairs.empty()) throw ValidationError("eta_sweep: no observable pairs");
  if (samples < 1) throw ValidationError("eta_sweep: samples must be positive");
  int usable = 0;
  for (double eta : eta_list) {
    if (!(eta > 0)) throw ValidationError("eta_sweep: eta must be positive");
    check_domain(eta, n, opt.domain_eps, "eta_sweep");
    if (eta <= opt.eta_star) ++usable;
  }
  if (usable < 3)
    throw ValidationError("eta_sweep: insufficient dynamic range (need 3 values of eta <= eta_*)");

  const std::size_t np = pairs.size(), nq = eta_list.size();
  struct Slot {
    cplx z1, z2, det;
    CVec shift1, shift2;  // diagonal corrections A_reg - A
  };
  std::vector<CMat> base1(np), base2(np);
  for (std::size_t p = 0; p < np; ++p) {
    base1[p] = make_observable(pairs[p].a1, n);
    base2[p] = make_observable(pairs[p].a2, n);
  }
  EtaSweep out;
  out.etas = eta_list;
  out.residuals.assign(np, std::vector<double>(nq, 0.0));
  std::vector<std::vector<Slot>> slots(np, std::vector<Slot>(nq));
  for (std::size_t q = 0; q < nq; ++q) {
    const cplx z1(e1, eta_list[q]), z2(e2, -eta_list[q]);
    const CVec m1 = solve_vde(e, z1, opt.dyson_tol).m;
    const CVec m2 = solve_vde(e, z2, opt.dyson_tol).m;
    for (std::size_t p = 0; p < np; ++p) {
      CMat a1 = base1[p], a2 = base2[p];
      if (pairs[p].regularize) {
        a1 = regularize(a1, e, z2, z1, 0.0, 0.0, opt.dyson_tol).regular_part;
        a2 = regularize(a2, e, z1, z2, 0.0, 0.0, opt.dyson_tol).regular_part;
      }
      Slot& s = slots[p][q];
      s.z1 = z1;
      s.z2 = z2;
      s.shift1 = a1.diagonal() - base1[p].diagonal();
      s.shift2 = a2.diagonal() - base2[p].diagonal();
      s.det = trace_product(chain_approx2(e, m1, a1, m2).value, a2);
      out.residuals[p][q] = regularity_residual(a1, e, z1, z2, opt.dyson_tol);
    }
  }

  auto shifted = [](const Spectrum& sp, const CMat& at, const CVec& d) {
    if (d.size() == 0 || d.cwiseAbs().maxCoeff() == 0.0) return at;
    CMat out = at;
    if ((d.array() - d[0]).abs().maxCoeff() <= 1e-15 * std::abs(d[0])) {
      out.diagonal().array() += d[0];
    } else {
      out += sp.u.adjoint() * d.asDiagonal() * sp.u;
    }
    return out;
  };

  // values[p][q][i]
  std::vector<std::vector<std::vector<double>>> values(
      np, std::vector<std::vector<double>>(nq, std::vector<double>(samples)));
  kernels::for_each_index(
      samples,
      [&](int i) {
        const CMat h = sample_matrix(e, stream_seed(seed, n, i), opt.law);
        const Spectrum sp = spectrum(h, e.symmetry);
        if (i == 0) check_spectrum(h, sp);
        for (std::size_t p = 0; p < np; ++p) {
          const CMat b1 = to_eigenbasis(sp, base1[p]);
          const CMat b2 = to_eigenbasis(sp, base2[p]);
          for (std::size_t q = 0; q < nq; ++q) {
            const Slot& s = slots[p][q];
            const CMat a1t = shifted(sp, b1, s.shift1);
            const CMat a2t = shifted(sp, b2, s.shift2);
            values[p][q][i] = std::abs(
                kernels::chain_trace2(sp.lambda, a1t, a2t, s.z1, s.z2, Exec::Serial) - s.det);
          }
        }
      },
      opt.exec);

  for (std::size_t p = 0; p < np; ++p) {
    std::vector<double> med;
    std::vector<std::pair<double, double>> pts;
    for (std::size_t q = 0; q < nq; ++q) {
      med.push_back(sample_median_guard(values[p][q]));
      if (eta_list[q] <= opt.eta_star) pts.emplace_back(eta_list[q], med.back());
    }
    for (const auto& pt : pts)
      if (!(pt.second > 0)) throw DegenerateDataError("eta_sweep: degenerate data (zero medians)");
    out.fits.push_back(fit_exponent(pts));
    out.medians.push_back(std::move(med));
  }
  return out;
}

ScalingFit eta_scaling_law(const EnsembleSpec& e, double e1, double e2, const ObservableSpec& a1,
                           const ObservableSpec& a2, bool regularize,
                           const std::vector<double>& eta_list, int samples, std::uint64_t seed,
                           const HarnessOptions& opt) {
  return eta_sweep(e, e1, e2, {{a1, a2, regularize}}, eta_list, samples, seed, opt).fits.front();
}

}  // namespace wtlab
