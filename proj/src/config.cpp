#include "wtlab/config.hpp"

#include <yaml-cpp/yaml.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace wtlab {

std::string experiment_name(Experiment x) {
  switch (x) {
    case Experiment::Density: return "density";
    case Experiment::StabilityScan: return "stability-scan";
    case Experiment::FlowCheck: return "flow-check";
    case Experiment::IntegralRepr: return "integral-repr";
    case Experiment::LocalLaw: return "local-law";
    case Experiment::Eth: return "eth";
  }
  return "?";
}

Experiment parse_experiment(const std::string& s) {
  for (Experiment x : {Experiment::Density, Experiment::StabilityScan, Experiment::FlowCheck,
                       Experiment::IntegralRepr, Experiment::LocalLaw, Experiment::Eth})
    if (experiment_name(x) == s) return x;
  throw ValidationError("unknown experiment '" + s + "'");
}

namespace {

template <class T>
T as(const YAML::Node& node, const std::string& field) {
  try {
    return node.as<T>();
  } catch (const YAML::Exception&) {
    throw ValidationError("config: field '" + field + "' has the wrong type");
  }
}

cplx as_complex(const YAML::Node& node, const std::string& field) {
  if (node.IsScalar()) return {as<double>(node, field), 0.0};
  if (node.IsSequence() && node.size() == 2)
    return {as<double>(node[0], field), as<double>(node[1], field)};
  throw ValidationError("config: field '" + field + "' must be a number or [re, im]");
}

template <class T>
void read(const YAML::Node& map, const char* key, T& out, const std::string& prefix) {
  if (const YAML::Node v = map[key]) out = as<T>(v, prefix + key);
}

std::vector<double> read_doubles(const YAML::Node& node, const std::string& field) {
  if (!node.IsSequence()) throw ValidationError("config: field '" + field + "' must be a list");
  std::vector<double> out;
  for (const auto& v : node) out.push_back(as<double>(v, field));
  return out;
}

ProfileSpec parse_profile(const YAML::Node& node) {
  ProfileSpec p;
  if (!node) return p;
  if (!node.IsMap()) throw ValidationError("config: 'profile' must be a mapping");
  if (node["symmetry"]) p.symmetry = parse_symmetry(as<std::string>(node["symmetry"], "profile.symmetry"));
  read(node, "k", p.k, "profile.");
  if (p.k < 1) throw ValidationError("config: profile.k must be positive");
  p.a_blocks.assign(p.k, 0.0);
  p.s_blocks = RMat::Ones(p.k, p.k);
  p.t_blocks = CMat::Zero(p.k, p.k);
  if (node["a"]) p.a_blocks = read_doubles(node["a"], "profile.a");
  if (const YAML::Node s = node["s"]) {
    if (!s.IsSequence() || static_cast<int>(s.size()) != p.k)
      throw ValidationError("config: profile.s must be a k x k list of rows");
    for (int i = 0; i < p.k; ++i) {
      const std::vector<double> row = read_doubles(s[i], "profile.s");
      if (static_cast<int>(row.size()) != p.k)
        throw ValidationError("config: profile.s must be a k x k list of rows");
      for (int j = 0; j < p.k; ++j) p.s_blocks(i, j) = row[j];
    }
  }
  if (const YAML::Node t = node["t"]) {
    if (!t.IsSequence() || static_cast<int>(t.size()) != p.k)
      throw ValidationError("config: profile.t must be a k x k list of rows");
    for (int i = 0; i < p.k; ++i) {
      if (!t[i].IsSequence() || static_cast<int>(t[i].size()) != p.k)
        throw ValidationError("config: profile.t must be a k x k list of rows");
      for (int j = 0; j < p.k; ++j) p.t_blocks(i, j) = as_complex(t[i][j], "profile.t");
    }
  }
  return p;
}

ExperimentParams parse_params(const YAML::Node& node) {
  ExperimentParams q;
  if (!node) return q;
  if (!node.IsMap()) throw ValidationError("config: 'parameters' must be a mapping");
  static const std::set<std::string> known = {
      "n", "n_list", "samples", "tol", "eta_floor", "eps", "eta_star", "rho_min", "e_min",
      "e_max", "points", "z_pairs", "z_list", "t", "T", "trajectory_samples", "chart",
      "line_xi", "mode", "observable", "observable2", "regularize", "e1", "e2", "eta_list",
      "expect_exponent", "exponent_tol"};
  for (const auto& kv : node) {
    const std::string key = kv.first.as<std::string>();
    if (!known.count(key)) throw ValidationError("config: unknown parameter '" + key + "'");
  }
  const std::string p = "parameters.";
  read(node, "n", q.n, p);
  if (node["n_list"]) q.n_list = as<std::vector<int>>(node["n_list"], p + "n_list");
  read(node, "samples", q.samples, p);
  read(node, "tol", q.tol, p);
  read(node, "eta_floor", q.eta_floor, p);
  read(node, "eps", q.eps, p);
  read(node, "eta_star", q.eta_star, p);
  read(node, "rho_min", q.rho_min, p);
  read(node, "e_min", q.e_min, p);
  read(node, "e_max", q.e_max, p);
  read(node, "points", q.points, p);
  if (const YAML::Node zp = node["z_pairs"]) {
    if (!zp.IsSequence()) throw ValidationError("config: parameters.z_pairs must be a list");
    for (const auto& pair : zp) {
      if (!pair.IsSequence() || pair.size() != 2)
        throw ValidationError("config: each z_pairs entry must be [z1, z2]");
      q.z_pairs.push_back({as_complex(pair[0], p + "z_pairs"), as_complex(pair[1], p + "z_pairs")});
    }
  }
  if (const YAML::Node zl = node["z_list"]) {
    if (!zl.IsSequence()) throw ValidationError("config: parameters.z_list must be a list");
    for (const auto& z : zl) q.z_list.push_back(as_complex(z, p + "z_list"));
  }
  read(node, "t", q.t, p);
  read(node, "T", q.T, p);
  read(node, "trajectory_samples", q.trajectory_samples, p);
  if (const YAML::Node c = node["chart"]) {
    if (c["vertex"]) q.chart.vertex = as_complex(c["vertex"], p + "chart.vertex");
    read(c, "aperture", q.chart.aperture, p + "chart.");
    read(c, "tilt", q.chart.tilt, p + "chart.");
    read(c, "xi", q.chart.xi, p + "chart.");
  }
  read(node, "line_xi", q.line_xi, p);
  read(node, "mode", q.mode, p);
  read(node, "observable", q.observable, p);
  read(node, "observable2", q.observable2, p);
  read(node, "regularize", q.regularize, p);
  read(node, "e1", q.e1, p);
  read(node, "e2", q.e2, p);
  if (node["eta_list"]) q.eta_list = read_doubles(node["eta_list"], p + "eta_list");
  if (node["expect_exponent"])
    q.expect_exponent = as<double>(node["expect_exponent"], p + "expect_exponent");
  read(node, "exponent_tol", q.exponent_tol, p);
  return q;
}

}  // namespace

ExperimentConfig parse_config(const std::string& text) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& ex) {
    throw ValidationError(std::string("config: malformed YAML: ") + ex.msg);
  }
  if (!root.IsMap()) throw ValidationError("config: top level must be a mapping");
  ExperimentConfig cfg;
  cfg.source_text = text;
  if (root["experiment"]) cfg.experiment = parse_experiment(as<std::string>(root["experiment"], "experiment"));
  if (root["seed"]) cfg.seed = as<std::uint64_t>(root["seed"], "seed");
  if (root["output_dir"]) cfg.output_dir = as<std::string>(root["output_dir"], "output_dir");
  cfg.profile = parse_profile(root["profile"]);
  cfg.parameters = parse_params(root["parameters"]);
  for (const auto& kv : root) {
    const std::string key = kv.first.as<std::string>();
    if (key != "experiment" && key != "seed" && key != "output_dir" && key != "profile" &&
        key != "parameters")
      throw ValidationError("config: unknown top-level key '" + key + "'");
  }
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("config: cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::vector<std::string> validate(const ExperimentConfig& cfg) {
  std::vector<std::string> out;
  const ExperimentParams& q = cfg.parameters;
  try {
    validate_profile(cfg.profile);
  } catch (const ValidationError& ex) {
    out.emplace_back(ex.what());
  }
  auto positive = [&](double v, const char* name) {
    if (!(v > 0)) out.push_back(std::string("parameters.") + name + ": must be positive");
  };
  positive(q.tol, "tol");
  positive(q.eta_floor, "eta_floor");
  positive(q.eps, "eps");
  positive(q.eta_star, "eta_star");
  if (q.eps >= 1) out.emplace_back("parameters.eps: must lie in (0, 1)");
  if (q.n < 1) out.emplace_back("parameters.n: must be positive");
  if (q.samples < 1) out.emplace_back("parameters.samples: must be positive");
  if (q.n >= 1 && q.n < cfg.profile.k) out.emplace_back("parameters.n: must be at least profile.k");

  auto domain = [&](double eta, int n, const char* field) {
    const double floor = std::pow(double(n), -1.0 + q.eps);
    if (eta < floor)
      out.push_back(std::string("parameters.") + field + ": eta = " + std::to_string(eta) +
                    " violates the bulk-domain constraint eta >= N^{-1+eps} = " +
                    std::to_string(floor));
  };

  switch (cfg.experiment) {
    case Experiment::Density:
      if (!(q.e_max > q.e_min)) out.emplace_back("parameters.e_max: must exceed e_min");
      if (q.points < 2) out.emplace_back("parameters.points: need at least 2");
      break;
    case Experiment::StabilityScan:
      if (q.z_pairs.empty()) out.emplace_back("parameters.z_pairs: must be nonempty");
      for (const ZPair& zp : q.z_pairs)
        if (zp.z1.imag() == 0 || zp.z2.imag() == 0)
          out.emplace_back("parameters.z_pairs: Im z must be nonzero");
      break;
    case Experiment::FlowCheck:
      if (q.z_list.empty()) out.emplace_back("parameters.z_list: must be nonempty");
      for (cplx z : q.z_list)
        if (z.imag() == 0) out.emplace_back("parameters.z_list: Im z must be nonzero");
      if (!(q.T > 0)) out.emplace_back("parameters.T: must be positive");
      if (!(q.t >= 0 && q.t <= q.T)) out.emplace_back("parameters.t: must lie in [0, T]");
      if (q.trajectory_samples < 2) out.emplace_back("parameters.trajectory_samples: need at least 2");
      break;
    case Experiment::IntegralRepr:
      try {
        validate_chart(q.chart);
      } catch (const ValidationError& ex) {
        out.push_back(std::string("parameters.chart: ") + ex.what());
      }
      if (!(q.line_xi > 0 && q.line_xi < q.chart.vertex.imag()))
        out.emplace_back("parameters.line_xi: must lie in (0, Im vertex)");
      if (!(q.t >= 0 && q.t <= q.T)) out.emplace_back("parameters.t: must lie in [0, T]");
      break;
    case Experiment::LocalLaw: {
      for (const std::string& name : {q.observable, q.observable2}) {
        try {
          parse_observable(name);
        } catch (const ValidationError& ex) {
          out.push_back(std::string("parameters.observable: ") + ex.what());
        }
      }
      if (q.mode == "phi") {
        if (q.z_pairs.size() != 1) out.emplace_back("parameters.z_pairs: phi mode needs exactly one pair");
        for (const ZPair& zp : q.z_pairs) {
          if (zp.z1.imag() == 0 || zp.z2.imag() == 0)
            out.emplace_back("parameters.z_pairs: Im z must be nonzero");
          else
            domain(std::min(std::abs(zp.z1.imag()), std::abs(zp.z2.imag())), q.n, "z_pairs");
        }
      } else if (q.mode == "eta-sweep") {
        if (q.eta_list.size() < 3) out.emplace_back("parameters.eta_list: need at least 3 values");
        int usable = 0;
        for (double eta : q.eta_list) {
          if (!(eta > 0)) {
            out.emplace_back("parameters.eta_list: eta must be positive");
            continue;
          }
          domain(eta, q.n, "eta_list");
          if (eta <= q.eta_star) ++usable;
        }
        if (q.eta_list.size() >= 3 && usable < 3)
          out.emplace_back("parameters.eta_list: insufficient dynamic range below eta_star");
      } else if (q.mode == "size-sweep") {
        if (q.n_list.size() < 3) out.emplace_back("parameters.n_list: need at least 3 sizes");
        if (q.z_list.size() != 1) out.emplace_back("parameters.z_list: size-sweep needs exactly one z");
        for (int n : q.n_list)
          for (cplx z : q.z_list) {
            if (z.imag() == 0)
              out.emplace_back("parameters.z_list: Im z must be nonzero");
            else
              domain(std::abs(z.imag()), n, "z_list");
          }
      } else {
        out.push_back("parameters.mode: unknown local-law mode '" + q.mode + "'");
      }
      break;
    }
    case Experiment::Eth:
      if (q.n_list.empty()) out.emplace_back("parameters.n_list: must be nonempty");
      for (std::size_t i = 1; i < q.n_list.size(); ++i)
        if (q.n_list[i] <= q.n_list[i - 1]) out.emplace_back("parameters.n_list: must ascend");
      if (!(q.rho_min > 0)) out.emplace_back("parameters.rho_min: must be positive");
      try {
        parse_observable(q.observable);
      } catch (const ValidationError& ex) {
        out.push_back(std::string("parameters.observable: ") + ex.what());
      }
      break;
  }
  for (int n : q.n_list)
    if (n < cfg.profile.k) out.emplace_back("parameters.n_list: sizes must be at least profile.k");
  if (!(q.exponent_tol > 0)) out.emplace_back("parameters.exponent_tol: must be positive");
  return out;
}

}  // namespace wtlab
