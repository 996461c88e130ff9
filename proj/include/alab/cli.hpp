#ifndef ALAB_CLI_HPP
#define ALAB_CLI_HPP

#include "alab/disorder.hpp"
#include "alab/error.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

namespace alab::cli {

using nlohmann::json;

inline constexpr const char* kArtifactVersion = "alab-1.0.0";

// Malformed, incomplete or inconsistent configuration (exit code 2).
class ConfigError : public InvalidArgument {
 public:
  using InvalidArgument::InvalidArgument;
};

const std::vector<std::string>& experiment_kinds();

struct ModelSettings {
  int d = 1;
  int L = 0;
  double lambda = 0.0;
  Distribution distribution;
};

struct RunSettings {
  std::size_t n = 1;
  std::uint64_t seed = 0;
  std::size_t workers = 1;
  std::string out = "results";
};

/// A validated configuration. `resolved` holds every key with defaults
/// expanded and is what gets written to resolved_config.json.
struct ExperimentConfig {
  std::string kind;
  ModelSettings model;
  RunSettings run;
  json method;
  json resolved;
  std::vector<std::string> defaults_applied;  // "path = value" for every default used
};

// Sets a dotted path ("model.lambda") to a value; the value is read as JSON
// when it parses, otherwise as a string.
void apply_override(json& raw, const std::string& assignment);

ExperimentConfig resolve_config(const std::string& kind, json raw);
json read_config_file(const std::filesystem::path& path);
ExperimentConfig parse_config(const std::string& kind, const std::filesystem::path& path);

// Distribution from {"kind": "uniform" | "piecewise" | "bernoulli", ...}.
Distribution parse_distribution(const json& j);

// Git blob hash (SHA-1 of "blob <size>\0<content>") as lowercase hex.
std::string git_blob_hash(const std::string& content);

// Hash of the resolved config without run.workers and run.out, plus the artifact version.
std::string config_hash(const ExperimentConfig& config);

/// Runs the experiment and writes resolved_config.json, summary.json and the
/// CSV files into run.out. Returns the summary.
json run_experiment(const ExperimentConfig& config);

// "%.17g".
std::string format_number(double v);

}  // namespace alab::cli

#endif  // ALAB_CLI_HPP
