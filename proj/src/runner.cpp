#include "wtlab/runner.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <json.hpp>

#include "wtlab/io.hpp"
#include "wtlab/kernels.hpp"

namespace wtlab {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

json complex_json(cplx z) { return json::array({z.real(), z.imag()}); }

json fit_json(const ScalingFit& f) {
  json j;
  j["exponent"] = f.exponent;
  j["intercept"] = f.intercept;
  j["stderr"] = f.stderr_;
  j["r_squared"] = f.r_squared;
  j["ci95"] = json::array({f.ci_low, f.ci_high});
  json pts = json::array();
  for (const auto& [x, y] : f.points) pts.push_back(json::array({x, y}));
  j["points"] = pts;
  return j;
}

json profile_json(const ProfileSpec& p) {
  json j;
  j["k"] = p.k;
  j["symmetry"] = symmetry_name(p.symmetry);
  j["a"] = p.a_blocks;
  json s = json::array(), t = json::array();
  for (int r = 0; r < p.k; ++r) {
    json srow = json::array(), trow = json::array();
    for (int c = 0; c < p.k; ++c) {
      srow.push_back(p.s_blocks(r, c));
      trow.push_back(complex_json(p.t_blocks(r, c)));
    }
    s.push_back(srow);
    t.push_back(trow);
  }
  j["s"] = s;
  j["t"] = t;
  return j;
}

class Context {
 public:
  Context(const ExperimentConfig& cfg, RunManifest& man) : cfg_(cfg), man_(man) {
    fs::create_directories(cfg.output_dir);
    start_ = std::chrono::steady_clock::now();
  }

  std::string path(const std::string& name) {
    names_.push_back(name);
    return (fs::path(cfg_.output_dir) / name).string();
  }

  void stage(const std::string& name) {
    const auto now = std::chrono::steady_clock::now();
    man_.stages.emplace_back(name, std::chrono::duration<double>(now - mark_).count());
    mark_ = now;
  }

  void write_json(const std::string& name, const json& j) {
    std::ofstream out(path(name));
    out << j.dump(2) << '\n';
  }

  void check_exponent(const std::string& what, double exponent) {
    const auto& q = cfg_.parameters;
    if (!q.expect_exponent) return;
    const bool ok = std::abs(exponent - *q.expect_exponent) <= q.exponent_tol;
    if (!ok) {
      man_.acceptance_passed = false;
      man_.acceptance_messages.push_back(what + " exponent " + format_double(exponent) +
                                         " outside " + format_double(*q.expect_exponent) +
                                         " +/- " + format_double(q.exponent_tol));
    }
  }

  void finish() {
    for (const std::string& n : names_)
      man_.artifacts.push_back({n, sha256_file((fs::path(cfg_.output_dir) / n).string())});
    man_.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  json base_report() const {
    json j;
    j["experiment"] = experiment_name(cfg_.experiment);
    j["seed"] = cfg_.seed;
    j["profile"] = profile_json(cfg_.profile);
    return j;
  }

 private:
  const ExperimentConfig& cfg_;
  RunManifest& man_;
  std::vector<std::string> names_;
  std::chrono::steady_clock::time_point start_;
  std::chrono::steady_clock::time_point mark_ = std::chrono::steady_clock::now();
};

HarnessOptions harness_options(const ExperimentParams& q) {
  HarnessOptions o;
  o.exec = Exec::Parallel;
  o.dyson_tol = std::min(q.tol, 1e-12);
  o.eta_floor = q.eta_floor;
  o.domain_eps = q.eps;
  o.eta_star = q.eta_star;
  return o;
}

void run_density(const ExperimentConfig& cfg, Context& ctx) {
  const auto& q = cfg.parameters;
  const EnsembleSpec e = build_ensemble(cfg.profile, q.n);
  const DensityProfile d = density(e, uniform_grid(q.e_min, q.e_max, q.points), q.eta_floor, q.tol);
  ctx.stage("density");
  write_density_csv(d, ctx.path("density.csv"));
  write_quantiles_csv(d, ctx.path("quantiles.csv"));
  json r = ctx.base_report();
  r["n"] = q.n;
  r["eta_used"] = d.eta_used;
  r["total_mass"] = d.total_mass;
  r["warnings"] = d.warnings;
  ctx.write_json("report.json", r);
}

void run_stability(const ExperimentConfig& cfg, Context& ctx) {
  const auto& q = cfg.parameters;
  const EnsembleSpec e = build_ensemble(cfg.profile, q.n);
  CsvWriter w(ctx.path("stability.csv"),
              {"re_z1", "im_z1", "re_z2", "im_z2", "re_beta", "im_beta", "abs_beta",
               "second_modulus", "isolated", "f_norm", "f_gap"});
  for (const ZPair& zp : q.z_pairs) {
    const CVec m1 = solve_vde(e, zp.z1, q.tol).m;
    const CVec m2 = solve_vde(e, zp.z2, q.tol).m;
    const CVec prod = m1.cwiseProduct(m2);
    StabilityEig eig;
    if (auto reduced = smallest_eig_blocks(e, prod))
      eig = *reduced;
    else
      eig = smallest_eig(stability_matrix(e, m1, m2), q.tol);
    const SaturatedF f = saturated_F(e, m1, m2);
    w.row({zp.z1.real(), zp.z1.imag(), zp.z2.real(), zp.z2.imag(), eig.beta.real(),
           eig.beta.imag(), std::abs(eig.beta), eig.second_modulus, eig.isolated ? 1.0 : 0.0,
           f.norm, f.gap});
  }
  ctx.stage("stability-scan");
}

void run_flow(const ExperimentConfig& cfg, Context& ctx) {
  const auto& q = cfg.parameters;
  const EnsembleSpec e = build_ensemble(cfg.profile, q.n);
  CsvWriter w(ctx.path("flow_summary.csv"),
              {"re_z", "im_z", "max_comparability", "min_eta_ratio", "max_eta_ratio",
               "m_scaling_discrepancy"});
  for (std::size_t i = 0; i < q.z_list.size(); ++i) {
    const cplx z = q.z_list[i];
    const CharTrajectory tr = eta_profile(e, z, q.T, q.trajectory_samples, q.tol);
    write_trajectory_csv(tr, ctx.path("trajectory_" + std::to_string(i) + ".csv"));
    const double disc = verify_m_scaling(e, z, q.t, q.T, q.tol);
    w.row({z.real(), z.imag(), tr.max_comparability, tr.min_eta_ratio, tr.max_eta_ratio, disc});
  }
  ctx.stage("flow-check");
}

void run_integral(const ExperimentConfig& cfg, Context& ctx) {
  const auto& q = cfg.parameters;
  const EnsembleSpec e = build_ensemble(cfg.profile, q.n);
  const CMat h = sample_matrix(e, stream_seed(cfg.seed, q.n, 0));
  const IntegralRepr cone = resolvent_integral_repr(h, e, q.t, q.T, q.chart);
  ctx.stage("cone");
  const IntegralRepr line = stieltjes_line_repr(h, e, q.t, q.T, q.chart.vertex, q.line_xi);
  ctx.stage("line");
  CsvWriter w(ctx.path("integral.csv"),
              {"method", "max_discrepancy", "error_estimate", "evaluations", "intervals"});
  for (const auto& [name, r] : {std::pair<std::string, const IntegralRepr*>{"cone", &cone},
                                {"line", &line}})
    w.row_text({name, format_double(r->max_discrepancy), format_double(r->quad.error_estimate),
                std::to_string(r->quad.evaluations), std::to_string(r->quad.intervals)});
  json rep = ctx.base_report();
  rep["n"] = q.n;
  rep["cone_discrepancy"] = cone.max_discrepancy;
  rep["line_discrepancy"] = line.max_discrepancy;
  rep["cone_vs_line"] = (cone.reconstruction - line.reconstruction).cwiseAbs().maxCoeff();
  ctx.write_json("report.json", rep);
}

void run_local_law(const ExperimentConfig& cfg, Context& ctx) {
  const auto& q = cfg.parameters;
  const HarnessOptions opt = harness_options(q);
  const ObservableSpec o1 = parse_observable(q.observable), o2 = parse_observable(q.observable2);
  json rep = ctx.base_report();
  rep["mode"] = q.mode;
  rep["observables"] = {observable_name(o1), observable_name(o2)};
  rep["regularized"] = q.regularize;
  if (q.mode == "phi") {
    const EnsembleSpec e = build_ensemble(cfg.profile, q.n);
    const ZPair zp = q.z_pairs.front();
    CMat a1 = make_observable(o1, q.n), a2 = make_observable(o2, q.n);
    if (q.regularize) {
      a1 = regularize(a1, e, zp.z2, zp.z1, 0.0, 0.0, opt.dyson_tol).regular_part;
      a2 = regularize(a2, e, zp.z1, zp.z2, 0.0, 0.0, opt.dyson_tol).regular_part;
    }
    const LocalLawStats st = phi_stats(e, zp.z1, zp.z2, a1, a2, q.samples, cfg.seed, opt);
    ctx.stage("phi");
    CsvWriter w(ctx.path("phi_samples.csv"),
                {"sample", "phi1", "phi2_hs", "phi2_op", "phi11", "raw1", "raw2"});
    for (int i = 0; i < st.samples; ++i)
      w.row({double(i), st.phi1[i], st.phi2_hs[i], st.phi2_op[i], st.phi11[i], st.raw1[i],
             st.raw2[i]});
    rep["n"] = q.n;
    rep["z1"] = complex_json(zp.z1);
    rep["z2"] = complex_json(zp.z2);
    rep["samples"] = st.samples;
    rep["regularity_residual_a1"] = st.regularity_a1;
    rep["regularity_residual_a2"] = st.regularity_a2;
    rep["median_phi1"] = median(st.phi1);
    rep["median_phi2_hs"] = median(st.phi2_hs);
    rep["median_phi2_op"] = median(st.phi2_op);
    rep["median_phi11"] = median(st.phi11);
  } else if (q.mode == "eta-sweep") {
    const EnsembleSpec e = build_ensemble(cfg.profile, q.n);
    const EtaSweep sw =
        eta_sweep(e, q.e1, q.e2, {{o1, o2, q.regularize}}, q.eta_list, q.samples, cfg.seed, opt);
    ctx.stage("eta-sweep");
    CsvWriter w(ctx.path("eta_sweep.csv"), {"eta", "median_fluctuation", "regularity_residual"});
    for (std::size_t k = 0; k < sw.etas.size(); ++k)
      w.row({sw.etas[k], sw.medians[0][k], sw.residuals[0][k]});
    rep["n"] = q.n;
    rep["fit"] = fit_json(sw.fits[0]);
    ctx.check_exponent("eta-sweep", sw.fits[0].exponent);
  } else {
    const SizeSweep sw = single_resolvent_law(cfg.profile, q.z_list.front(), o1, q.regularize,
                                              q.n_list, q.samples, cfg.seed, opt);
    ctx.stage("size-sweep");
    CsvWriter w(ctx.path("size_sweep.csv"), {"n", "median_fluctuation"});
    for (std::size_t k = 0; k < sw.n_list.size(); ++k) w.row({double(sw.n_list[k]), sw.medians[k]});
    rep["z"] = complex_json(q.z_list.front());
    rep["fit"] = fit_json(sw.fit);
    ctx.check_exponent("size-sweep", sw.fit.exponent);
  }
  ctx.write_json("report.json", rep);
}

void run_eth(const ExperimentConfig& cfg, Context& ctx) {
  const auto& q = cfg.parameters;
  const HarnessOptions opt = harness_options(q);
  const ObservableSpec b = parse_observable(q.observable);
  const OverlapReport rep =
      eth_overlaps(cfg.profile, b, q.n_list, q.samples, q.rho_min, cfg.seed, opt);
  ctx.stage("eth");
  CsvWriter per(ctx.path("eth_per_n.csv"),
                {"n", "bulk_size", "median_deviation", "median_scaled", "median_rigidity",
                 "max_rigidity", "median_deviation_lambda_centering", "centering_spread"});
  CsvWriter raw(ctx.path("eth_samples.csv"), {"n", "sample", "deviation", "rigidity"});
  json table = json::array();
  for (const OverlapRow& r : rep.per_n) {
    per.row({double(r.n), double(r.bulk_size), r.median_deviation, r.median_scaled,
             r.median_rigidity, r.max_rigidity, r.median_deviation_lambda, r.centering_spread});
    for (std::size_t i = 0; i < r.deviations.size(); ++i)
      raw.row({double(r.n), double(i), r.deviations[i], r.rigidity[i]});
    json row;
    row["n"] = r.n;
    row["bulk_size"] = r.bulk_size;
    row["median_deviation"] = r.median_deviation;
    row["median_scaled"] = r.median_scaled;
    row["median_rigidity"] = r.median_rigidity;
    row["max_rigidity"] = r.max_rigidity;
    row["median_deviation_lambda_centering"] = r.median_deviation_lambda;
    row["centering_spread"] = r.centering_spread;
    table.push_back(row);
  }
  json j = ctx.base_report();
  j["observable"] = observable_name(b);
  j["samples"] = q.samples;
  j["rho_min"] = q.rho_min;
  j["per_n"] = table;
  if (rep.per_n.size() >= 3) {
    j["fit"] = fit_json(rep.fit);
    ctx.check_exponent("eth", rep.fit.exponent);
  } else {
    j["fit"] = nullptr;
  }
  ctx.write_json("report.json", j);
}

void write_manifest(const ExperimentConfig& cfg, const RunManifest& m) {
  json j;
  j["version"] = m.version;
  j["experiment"] = m.experiment;
  j["seed"] = m.seed;
  j["threads"] = m.threads;
  j["config"] = m.config_echo;
  json arts = json::array();
  for (const Artifact& a : m.artifacts) arts.push_back({{"path", a.path}, {"sha256", a.sha256}});
  j["artifacts"] = arts;
  j["wall_seconds"] = m.wall_seconds;
  json st = json::object();
  for (const auto& [k, v] : m.stages) st[k] = v;
  j["stages"] = st;
  j["acceptance_passed"] = m.acceptance_passed;
  j["acceptance_messages"] = m.acceptance_messages;
  std::ofstream out(fs::path(cfg.output_dir) / "manifest.json");
  out << j.dump(2) << '\n';
}

}  // namespace

RunManifest run(const ExperimentConfig& cfg) {
  const std::vector<std::string> diags = validate(cfg);
  if (!diags.empty()) throw ValidationError(diags.front());
  RunManifest man;
  man.experiment = experiment_name(cfg.experiment);
  man.config_echo = cfg.source_text;
  man.seed = cfg.seed;
  man.threads = kernels::max_threads();
  Context ctx(cfg, man);
  switch (cfg.experiment) {
    case Experiment::Density: run_density(cfg, ctx); break;
    case Experiment::StabilityScan: run_stability(cfg, ctx); break;
    case Experiment::FlowCheck: run_flow(cfg, ctx); break;
    case Experiment::IntegralRepr: run_integral(cfg, ctx); break;
    case Experiment::LocalLaw: run_local_law(cfg, ctx); break;
    case Experiment::Eth: run_eth(cfg, ctx); break;
  }
  ctx.finish();
  write_manifest(cfg, man);
  return man;
}

}  // namespace wtlab
