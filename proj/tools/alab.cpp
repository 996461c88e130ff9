#include "alab/cli.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

namespace {

std::string kinds_list() {
  std::string s;
  for (const auto& k : alab::cli::experiment_kinds()) s += (s.empty() ? "" : ", ") + k;
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for the discrete Anderson model"};
  std::string kind;
  std::string config_path;
  std::vector<std::string> overrides;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  std::optional<std::string> out;
  app.add_option("kind", kind, "Experiment kind: " + kinds_list())->required();
  app.add_option("--config", config_path, "JSON config file")->required();
  app.add_option("--set", overrides, "Override a config key, e.g. --set model.lambda=3");
  app.add_option("--seed", seed, "Master seed (run.seed)");
  app.add_option("--workers", workers, "Worker threads (run.workers)");
  app.add_option("--out", out, "Output directory (run.out)");
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  alab::cli::ExperimentConfig config;
  try {
    nlohmann::json raw = alab::cli::read_config_file(config_path);
    for (const auto& o : overrides) alab::cli::apply_override(raw, o);
    if (seed) alab::cli::apply_override(raw, "run.seed=" + std::to_string(*seed));
    if (workers) alab::cli::apply_override(raw, "run.workers=" + std::to_string(*workers));
    if (out) raw["run"]["out"] = *out;
    config = alab::cli::resolve_config(kind, raw);
  } catch (const alab::InvalidArgument& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  }
  for (const auto& d : config.defaults_applied) std::cerr << "default: " << d << '\n';

  try {
    const nlohmann::json summary = alab::cli::run_experiment(config);
    for (const auto& [name, ok] : summary.at("audits").items()) {
      std::cout << (ok.get<bool>() ? "PASS " : "FAIL ") << name << '\n';
    }
    std::cout << "results written to " << config.run.out << '\n';
  } catch (const alab::InvalidArgument& e) {
    std::cerr << "config error in " << kind << ": " << e.what() << '\n';
    return 2;
  } catch (const alab::NumericError& e) {
    std::cerr << "numeric failure in " << kind << ": " << e.what() << '\n';
    return 3;
  }
  return 0;
}
