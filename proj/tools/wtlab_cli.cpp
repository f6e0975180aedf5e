#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "wtlab/kernels.hpp"
#include "wtlab/runner.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

int thread_count(const Flags& f) {
  if (f.threads) return *f.threads;
  if (const char* env = std::getenv("WTLAB_THREADS")) {
    try {
      return std::stoi(env);
    } catch (const std::exception&) {
      throw wtlab::ValidationError("WTLAB_THREADS must be an integer");
    }
  }
  return 0;
}

int execute(const std::string& experiment, const Flags& f, bool validate_only) {
  wtlab::ExperimentConfig cfg = wtlab::load_config(f.config);
  if (!experiment.empty()) {
    const wtlab::Experiment x = wtlab::parse_experiment(experiment);
    if (cfg.source_text.find("experiment:") != std::string::npos && cfg.experiment != x)
      throw wtlab::ValidationError("config names experiment '" +
                                   wtlab::experiment_name(cfg.experiment) +
                                   "' but subcommand is '" + experiment + "'");
    cfg.experiment = x;
  }
  if (f.seed) cfg.seed = *f.seed;
  if (f.out) cfg.output_dir = *f.out;
  const std::vector<std::string> diags = wtlab::validate(cfg);
  if (validate_only) {
    for (const auto& d : diags) std::cout << d << '\n';
    return diags.empty() ? 0 : 2;
  }
  if (!diags.empty()) throw wtlab::ValidationError(diags.front());
  const int k = thread_count(f);
  if (k < 0) throw wtlab::ValidationError("--threads must be nonnegative");
  if (k > 0) wtlab::kernels::set_threads(k);
  const wtlab::RunManifest m = wtlab::run(cfg);
  std::cout << m.experiment << ": wrote " << m.artifacts.size() << " artifacts to "
            << cfg.output_dir << " in " << m.wall_seconds << " s\n";
  if (!m.acceptance_passed) {
    for (const auto& msg : m.acceptance_messages) std::cerr << "acceptance: " << msg << '\n';
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wigner-type random matrix laboratory"};
  app.require_subcommand(1);
  Flags flags;
  std::string chosen;
  bool validate_only = false;
  const std::vector<std::string> names = {"density",       "stability-scan", "flow-check",
                                          "integral-repr", "local-law",      "eth"};
  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "YAML experiment configuration")->required();
    sub->add_option("--seed", flags.seed, "64-bit seed (overrides the config)");
    sub->add_option("--out", flags.out, "output directory (overrides the config)");
    sub->add_option("--threads", flags.threads, "worker threads (default: WTLAB_THREADS or all)");
  };
  for (const std::string& name : names) {
    CLI::App* sub = app.add_subcommand(name, "run the " + name + " experiment");
    add_flags(sub);
    sub->callback([&chosen, name] { chosen = name; });
  }
  CLI::App* val = app.add_subcommand("validate", "check a configuration and list diagnostics");
  add_flags(val);
  val->callback([&validate_only] { validate_only = true; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success&) {
    std::cout << app.help();
    return 0;
  } catch (const CLI::ParseError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  }

  try {
    return execute(chosen, flags, validate_only);
  } catch (const wtlab::ValidationError& ex) {
    std::cerr << "error: " << ex.what() << '\n';
    return 2;
  } catch (const wtlab::NumericalError& ex) {
    std::cerr << "numerical failure: " << ex.what() << '\n';
    return 3;
  } catch (const std::exception& ex) {
    std::cerr << "numerical failure: " << ex.what() << '\n';
    return 3;
  }
}
