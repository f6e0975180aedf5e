#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "wtlab/harness.hpp"

using namespace wtlab;

namespace {

CMat sign_observable(int n) { return make_observable(parse_observable("sign"), n); }

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("resolvent") {
  const cplx z(0.3, 0.4);
  CHECK(std::abs(resolvent(CMat::Constant(1, 1, 1.5), z)(0, 0) - 1.0 / (1.5 - z)) < 1e-15);

  CMat d = CMat::Zero(5, 5);
  for (int j = 0; j < 5; ++j) d(j, j) = j - 2.0;
  const CMat gd = resolvent(d, z);
  for (int j = 0; j < 5; ++j) CHECK(std::abs(gd(j, j) - 1.0 / (d(j, j) - z)) < 1e-15);

  const EnsembleSpec e = build_ensemble(flat_profile(), 8);
  const CMat h = sample_matrix(e, 3);
  const CMat g = resolvent(h, z);
  CHECK(resolvent_residual(h, CVec::Constant(8, z), g) <= 1e-12);
  CHECK((resolvent(h, std::conj(z)) - g.adjoint()).cwiseAbs().maxCoeff() < 1e-13);

  CVec zv(8);
  for (int j = 0; j < 8; ++j) zv[j] = cplx(0.1 * j, 0.2 + 0.05 * j);
  CHECK(resolvent_residual(h, zv, resolvent(h, zv)) <= 1e-12);
  zv[3] = cplx(0.0, -0.1);
  CHECK_THROWS_AS(resolvent(h, zv), ValidationError);
}

TEST_CASE("spectrum and eigenbasis transforms") {
  for (Symmetry sym : {Symmetry::ComplexHermitian, Symmetry::RealSymmetric}) {
    const EnsembleSpec e = build_ensemble(flat_profile(sym), 40);
    const CMat h = sample_matrix(e, 9);
    const Spectrum sp = spectrum(h, sym);
    const CMat rec = sp.u * sp.lambda.cast<cplx>().asDiagonal() * sp.u.adjoint();
    CHECK((rec - h).cwiseAbs().maxCoeff() <= 1e-10 * h.cwiseAbs().maxCoeff());
    CMat gram = sp.u.adjoint() * sp.u - CMat::Identity(40, 40);
    CHECK(gram.cwiseAbs().maxCoeff() <= 1e-12);
    for (const char* name : {"sign", "cosine", "point:0.3", "identity"}) {
      const CMat a = make_observable(parse_observable(name), 40);
      CHECK((to_eigenbasis(sp, a) - sp.u.adjoint() * a * sp.u).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}

TEST_CASE("observable family") {
  const CMat s = sign_observable(10);
  CHECK(s(4, 4) == 1.0);
  CHECK(s(5, 5) == -1.0);
  CHECK(hs_norm(s) == doctest::Approx(1.0));
  const CMat p = make_observable(parse_observable("point:0.25"), 16);
  CHECK(p(4, 4) == 4.0);
  CHECK(hs_norm(p) == doctest::Approx(1.0));
  CHECK(make_observable(parse_observable("cosine"), 4)(1, 1).real() == doctest::Approx(0.0));
  CHECK(make_observable(parse_observable("zero"), 4).isZero(0));
  CHECK(observable_name(parse_observable("identity")) == "identity");
  CHECK_THROWS_AS(parse_observable("banana"), ValidationError);
  CHECK_THROWS_AS(parse_observable("point:1.5"), ValidationError);
}

TEST_CASE("phi statistics: trivial cases, scale invariance, determinism") {
  const EnsembleSpec e = build_ensemble(flat_profile(), 48);
  const cplx z1(0.0, 0.1), z2(0.0, -0.1);
  const CMat a = sign_observable(48);
  HarnessOptions serial;
  serial.exec = Exec::Serial;

  const LocalLawStats zero = phi_stats(e, z1, z2, CMat::Zero(48, 48), a, 4, 1, serial);
  for (double x : zero.phi2_hs) CHECK(x == 0.0);
  for (double x : zero.raw2) CHECK(x == 0.0);

  const LocalLawStats s1 = phi_stats(e, z1, z2, a, a, 6, 42, serial);
  CHECK(s1.samples == 6);
  CHECK(s1.regularity_a1 < 1e-10);
  for (std::size_t i = 0; i < s1.phi2_hs.size(); ++i) {
    CHECK(std::isfinite(s1.phi2_hs[i]));
    CHECK(s1.phi2_hs[i] >= 0);
    CHECK(s1.phi11[i] >= 0);
  }
  const LocalLawStats scaled = phi_stats(e, z1, z2, 3.5 * a, -2.0 * a, 6, 42, serial);
  for (std::size_t i = 0; i < s1.phi2_hs.size(); ++i) {
    CHECK(scaled.phi2_hs[i] == doctest::Approx(s1.phi2_hs[i]).epsilon(1e-10));
    CHECK(scaled.phi2_op[i] == doctest::Approx(s1.phi2_op[i]).epsilon(1e-10));
    CHECK(scaled.phi1[i] == doctest::Approx(s1.phi1[i]).epsilon(1e-10));
  }
  HarnessOptions par;
  par.exec = Exec::Parallel;
  const LocalLawStats s2 = phi_stats(e, z1, z2, a, a, 6, 42, par);
  CHECK(s2.phi2_hs == s1.phi2_hs);
  CHECK(s2.raw1 == s1.raw1);

  CHECK_THROWS_AS(phi_stats(e, cplx(0, 1e-3), cplx(0, -1e-3), a, a, 2, 1), ValidationError);
}

TEST_CASE("exponent fits") {
  std::vector<std::pair<double, double>> xy;
  for (double x : {1.0, 2.0, 4.0, 8.0}) xy.emplace_back(x, x * x);
  const ScalingFit f = fit_exponent(xy);
  CHECK(f.exponent == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(f.stderr_ <= 1e-12);
  CHECK(f.r_squared == doctest::Approx(1.0));

  std::mt19937_64 rng(17);
  std::normal_distribution<double> g(0.0, 0.01);
  xy.clear();
  for (int i = 0; i < 8; ++i) {
    const double x = std::pow(2.0, i);
    xy.emplace_back(x, 3.0 / std::sqrt(x) * (1 + g(rng)));
  }
  const ScalingFit n = fit_exponent(xy);
  CHECK(std::abs(n.exponent + 0.5) <= 0.05);
  CHECK(n.ci_low <= n.exponent);
  CHECK(n.ci_high >= n.exponent);
  CHECK(n.stderr_ >= 0);

  CHECK_THROWS_AS(fit_exponent({{1, 1}, {2, 2}}), ValidationError);
  CHECK_THROWS_AS(fit_exponent({{1, 1}, {2, 0}, {3, 1}}), ValidationError);
  CHECK_THROWS_AS(fit_exponent({{2, 1}, {2, 2}, {2, 3}}), ValidationError);
}

TEST_CASE("median") {
  CHECK(median({3, 1, 2}) == 2);
  CHECK(median({4, 1, 2, 3}) == 2.5);
  CHECK_THROWS_AS(median({}), ValidationError);
}

TEST_CASE("ETH centering and overlap report") {
  const EnsembleSpec e = build_ensemble(flat_profile(), 64);
  const DensityProfile d = default_density(e);
  const std::vector<int> bulk = bulk_indices(d, SpectralDomain{});
  REQUIRE_FALSE(bulk.empty());
  CMat b = CMat::Zero(64, 64);
  for (int j = 0; j < 64; ++j) b(j, j) = std::cos(0.3 * j) + 0.2;
  const RVec c = eth_centering(e, d, bulk, b);
  const double mean = ntrace(b).real();
  for (int j : bulk) CHECK(std::abs(c[j] - mean) <= 1e-6);

  HarnessOptions serial;
  serial.exec = Exec::Serial;
  const OverlapReport r =
      eth_overlaps(flat_profile(), parse_observable("sign"), {32, 48, 64}, 3, 0.2, 5, serial);
  REQUIRE(r.per_n.size() == 3);
  for (const OverlapRow& row : r.per_n) {
    CHECK(row.bulk_size > 0);
    CHECK(row.centering_spread <= 1e-6);
    CHECK(row.deviations.size() == 3);
    for (double x : row.deviations) CHECK(x >= 0);
    for (double x : row.rigidity) CHECK(x >= 0);
  }
  CHECK(r.fit.points.size() == 3);
  const OverlapReport again =
      eth_overlaps(flat_profile(), parse_observable("sign"), {32, 48, 64}, 3, 0.2, 5);
  CHECK(again.per_n[2].deviations == r.per_n[2].deviations);
  CHECK(again.fit.exponent == r.fit.exponent);

  CHECK_THROWS_AS(eth_overlaps(flat_profile(), parse_observable("sign"), {64, 32}, 2, 0.2, 1),
                  ValidationError);
}

TEST_CASE("overlap matrix symmetry for Hermitian observables") {
  const EnsembleSpec e = build_ensemble(flat_profile(), 30);
  const Spectrum sp = spectrum(sample_matrix(e, 8), e.symmetry);
  const CMat o = to_eigenbasis(sp, make_observable(parse_observable("cosine"), 30));
  CHECK((o.cwiseAbs() - o.transpose().cwiseAbs()).cwiseAbs().maxCoeff() < 1e-13);
}

TEST_CASE("sweep guards") {
  const EnsembleSpec e = build_ensemble(flat_profile(), 64);
  HarnessOptions o;
  o.eta_star = 0.3;
  const ObservableSpec s = parse_observable("sign");
  CHECK_THROWS_WITH_AS(eta_scaling_law(e, 0, 0, s, s, true, {0.5, 0.8}, 2, 1, o),
                       doctest::Contains("insufficient dynamic range"), ValidationError);
  CHECK_THROWS_WITH_AS(eta_scaling_law(e, 0, 0, s, s, true, {0.2, 0.1, 0.01}, 2, 1, o),
                       doctest::Contains("bulk-domain"), ValidationError);
  CHECK_THROWS_AS(single_resolvent_law(flat_profile(), cplx(0, 0.1), parse_observable("zero"),
                                       true, {32, 64, 128}, 2, 1),
                  DegenerateDataError);
}

TEST_CASE("eta sweep smoke run") {
  const EnsembleSpec e = build_ensemble(flat_profile(), 64);
  const std::vector<ObservablePair> pairs = {
      {parse_observable("sign"), parse_observable("sign"), true},
      {parse_observable("identity"), parse_observable("identity"), false}};
  const EtaSweep a = eta_sweep(e, 0.0, 0.0, pairs, {0.4, 0.2, 0.1}, 4, 3);
  REQUIRE(a.fits.size() == 2);
  REQUIRE(a.medians[0].size() == 3);
  for (double r : a.residuals[0]) CHECK(r <= 1e-8);
  const EtaSweep b = eta_sweep(e, 0.0, 0.0, pairs, {0.4, 0.2, 0.1}, 4, 3);
  CHECK(a.medians == b.medians);
  CHECK(a.medians[1][2] > a.medians[0][2]);
}

}
