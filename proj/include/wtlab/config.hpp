#pragma once

#include <string>

#include "wtlab/flow.hpp"
#include "wtlab/harness.hpp"

namespace wtlab {

enum class Experiment { Density, StabilityScan, FlowCheck, IntegralRepr, LocalLaw, Eth };

std::string experiment_name(Experiment x);
Experiment parse_experiment(const std::string& s);

struct ZPair {
  cplx z1, z2;
};

// Union of the per-experiment parameter tables; each experiment reads its own subset.
struct ExperimentParams {
  int n = 256;
  std::vector<int> n_list;
  int samples = 20;
  double tol = 1e-12;
  double eta_floor = 1e-4;
  double eps = 0.1;
  double eta_star = 1.0;
  double rho_min = 0.2;

  // density
  double e_min = -2.5, e_max = 2.5;
  int points = 1001;

  // stability-scan, flow-check
  std::vector<ZPair> z_pairs;
  std::vector<cplx> z_list;
  double t = 0.0, T = 1.0;
  int trajectory_samples = 51;

  // integral-repr
  ConeChart chart;
  double line_xi = 1e-8;

  // local-law
  std::string mode = "phi";  // phi | eta-sweep | size-sweep
  std::string observable = "sign", observable2 = "sign";
  bool regularize = true;
  double e1 = 0.0, e2 = 0.0;
  std::vector<double> eta_list;

  // optional acceptance threshold on a fitted exponent
  std::optional<double> expect_exponent;
  double exponent_tol = 0.15;
};

struct ExperimentConfig {
  ProfileSpec profile;
  Experiment experiment = Experiment::Density;
  ExperimentParams parameters;
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::string source_text;  // echo of the parsed document
};

// YAML document; throws ValidationError with a one-line message on malformed input.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);

// Empty iff run's preconditions hold.
std::vector<std::string> validate(const ExperimentConfig& cfg);

}  // namespace wtlab
