#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "dpre/simulator.h"
#include "dpre/static_stage.h"

namespace dpre {

// Raw "section.key" -> value pairs in file order. Sweep entries live under
// "sweep.<param>" with comma-separated values.
struct RawConfig {
  std::vector<std::pair<std::string, std::string>> entries;

  void set(std::string key, std::string value);
  bool has(const std::string& key) const;
};

RawConfig parse_config(std::istream& in);  // ConfigError on malformed lines
RawConfig load_config(const std::filesystem::path& path);

struct ExperimentSpec {
  RunConfig base;
  std::vector<std::pair<std::string, std::vector<std::string>>> sweep;
  int replications = 1;
  std::filesystem::path output_dir;
  unsigned workers = 0;  // 0 = hardware concurrency
  std::vector<std::string> defaulted;  // keys that fell back to defaults
};

// Applies one parameter by its config name (the same names the sweep and
// the CLI flags use). ConfigError for unknown names or bad values.
void apply_setting(RunConfig& cfg, const std::string& name, const std::string& value);
bool is_setting(const std::string& name);

ExperimentSpec validate_config(const RawConfig& raw);

// Full config text for `spec`, readable by parse_config.
std::string to_config_text(const ExperimentSpec& spec);

// DPRE_OUTPUT_DIR when set, "out" otherwise.
std::filesystem::path default_output_dir();

struct SweepPoint {
  std::vector<std::pair<std::string, std::string>> params;
  RunConfig config;
};

std::vector<SweepPoint> expand_sweep(const ExperimentSpec& spec);

// Runs every point x seed on a worker pool, writes one CSV per point, an
// aggregate CSV, a summary CSV and manifest.json. Returns the manifest.
nlohmann::json run_experiment(const ExperimentSpec& spec);

// Rebuilds the spec recorded in a manifest, writing into `output_dir`.
ExperimentSpec spec_from_manifest(const nlohmann::json& manifest,
                                  const std::filesystem::path& output_dir);

// Everything the conventional-only bootstrap of `cfg` produces: the traffic,
// the access corpus, and the first model and plan.
struct BootstrapArtifacts {
  std::vector<Node> nodes;
  TriggerTrace trace;
  std::vector<AccessSample> samples;
  BayesModel model;
  StaticPlan plan;
};
BootstrapArtifacts bootstrap(const RunConfig& cfg);

// Admission error rates over `alphas` for the labels observed during the
// conventional-only bootstrap of `cfg`.
std::vector<ThresholdErrorPoint> threshold_analysis(const RunConfig& cfg,
                                                    std::span<const double> alphas);
void write_threshold_csv(std::ostream& out, std::span<const ThresholdErrorPoint> curve,
                         const std::string& config_hash);

struct MeanStd {
  double mean = 0.0;
  double stdev = 0.0;  // sample stdev, 0 for a single value
};
MeanStd mean_std(std::span<const double> values);

std::string version_string();

}  // namespace dpre
