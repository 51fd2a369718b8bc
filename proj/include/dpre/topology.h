#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dpre {

using NodeId = int;
using Tti = std::int64_t;  // one TTI is 1 ms

enum class SensingType { kTemperature, kHumidity, kPressure, kVibration, kInterference };
inline constexpr std::size_t kNumSensingTypes = 5;

std::string_view to_string(SensingType type);
SensingType parse_sensing_type(std::string_view name);

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(const Point& a, const Point& b);

struct Node {
  NodeId id = 0;
  Point location;
  SensingType type = SensingType::kTemperature;
  std::optional<int> cell;  // empty for interference nodes
};

struct ProbabilityRange {
  double lo = 0.0;
  double hi = 0.0;
};

struct TtiRange {
  Tti lo = 0;
  Tti hi = 0;
};

struct TrafficConfig {
  // Indexed by SensingType. Defaults are the Table I population divided by ten.
  std::array<int, kNumSensingTypes> n_per_type{12, 12, 12, 10, 30};
  double interference_prob = 0.8;
  ProbabilityRange dynamics_range{0.6, 0.8};
  int cells = 4;
  Tti plate_dwell_ttis = 40;
  // Typed (temperature/humidity/pressure) sensors fire within this many TTIs
  // of the plate entering their cell.
  Tti trigger_jitter_ttis = 6;
  // Idle TTIs between the plate leaving the line and the next plate entering.
  Tti plate_gap_ttis = 40;
  TtiRange conventional_delay_range{10, 25};
  double cell_length_m = 2.0;
  double line_width_m = 1.0;
  // Interference nodes are scattered over a floor band this wide, centred on
  // the line. Must be at least line_width_m.
  double floor_width_m = 1.0;
  // When > 0, correlated-node trigger probabilities are redrawn every this
  // many trials; 0 keeps them fixed for the whole run.
  int dynamics_resample_trials = 0;
  std::uint64_t seed = 1;

  Tti line_ttis() const { return static_cast<Tti>(cells) * plate_dwell_ttis; }
  Tti plate_period() const { return line_ttis() + plate_gap_ttis; }
  double line_length() const { return cells * cell_length_m; }
  int total_nodes() const;
};

// Throws ConfigError when a field is out of range.
void validate(const TrafficConfig& cfg);

TrafficConfig desk_scale_traffic();
TrafficConfig table1_traffic();

std::vector<Node> build_topology(const TrafficConfig& cfg);

struct TriggerEvent {
  NodeId node_id = 0;
  Tti trigger_tti = 0;
  SensingType deadline_type = SensingType::kTemperature;
  int trial = 0;
};

struct TriggerTrace {
  std::vector<TriggerEvent> events;  // sorted by trigger_tti, then node id
  // node_prob[id - 1][k] is the per-passage trigger probability of the node
  // during resample block k (a single block unless dynamics are resampled).
  std::vector<std::vector<double>> node_prob;

  double probability(NodeId id, int trial, int resample_trials) const;
};

TriggerTrace generate_triggers(std::span<const Node> nodes, const TrafficConfig& cfg,
                               int n_trials);

Tti conventional_access_delay(std::mt19937_64& rng, TtiRange range);

// Id lookup over a dense 1..N population.
const Node& node_by_id(std::span<const Node> nodes, NodeId id);

// Seeds an engine for an independent named stream derived from `seed`.
std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream);

void write_topology_csv(std::ostream& out, std::span<const Node> nodes);
void write_trigger_csv(std::ostream& out, std::span<const TriggerEvent> events);

}  // namespace dpre
