#pragma once

#include <string>

#include "wtlab/config.hpp"

namespace wtlab {

inline constexpr const char* kVersion = "0.1.0";

struct Artifact {
  std::string path;  // relative to the output directory
  std::string sha256;
};

struct RunManifest {
  std::string experiment;
  std::string config_echo;
  std::uint64_t seed = 0;
  int threads = 1;
  std::vector<Artifact> artifacts;
  double wall_seconds = 0.0;
  std::vector<std::pair<std::string, double>> stages;
  std::string version = kVersion;
  bool acceptance_passed = true;
  std::vector<std::string> acceptance_messages;
};

// Runs the configured experiment, writing artifacts and manifest.json into cfg.output_dir.
// ValidationError if the config does not validate; NumericalError propagates from the solvers.
RunManifest run(const ExperimentConfig& cfg);

}  // namespace wtlab
