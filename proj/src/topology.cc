#include "dpre/topology.h"

#include <algorithm>
#include <cmath>
#include <ostream>

#include "dpre/csv.h"
#include "dpre/errors.h"

namespace dpre {
namespace {

constexpr std::uint64_t kTopologyStream = 1;
constexpr std::uint64_t kTriggerStream = 2;

bool in_unit(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

std::string_view to_string(SensingType type) {
  switch (type) {
    case SensingType::kTemperature: return "temperature";
    case SensingType::kHumidity: return "humidity";
    case SensingType::kPressure: return "pressure";
    case SensingType::kVibration: return "vibration";
    case SensingType::kInterference: return "interference";
  }
  return "unknown";
}

SensingType parse_sensing_type(std::string_view name) {
  for (std::size_t i = 0; i < kNumSensingTypes; ++i) {
    auto t = static_cast<SensingType>(i);
    if (to_string(t) == name) return t;
  }
  throw DataError("unknown sensing type '" + std::string(name) + "'");
}

double distance(const Point& a, const Point& b) { return std::hypot(a.x - b.x, a.y - b.y); }

int TrafficConfig::total_nodes() const {
  int n = 0;
  for (int c : n_per_type) n += c;
  return n;
}

void validate(const TrafficConfig& cfg) {
  if (cfg.cells <= 0) throw ConfigError("traffic: cells must be positive");
  for (int c : cfg.n_per_type) {
    if (c < 0) throw ConfigError("traffic: node counts must be non-negative");
  }
  if (cfg.total_nodes() == 0) throw ConfigError("traffic: population is empty");
  if (!in_unit(cfg.interference_prob)) {
    throw ConfigError("traffic: interference_prob must lie in [0,1]");
  }
  if (!in_unit(cfg.dynamics_range.lo) || !in_unit(cfg.dynamics_range.hi) ||
      cfg.dynamics_range.lo > cfg.dynamics_range.hi) {
    throw ConfigError("traffic: dynamics_range must be an interval inside [0,1]");
  }
  if (cfg.plate_dwell_ttis <= 0) throw ConfigError("traffic: plate_dwell_ttis must be positive");
  if (cfg.trigger_jitter_ttis < 0 || cfg.trigger_jitter_ttis >= cfg.plate_dwell_ttis) {
    throw ConfigError("traffic: trigger_jitter_ttis must lie in [0, plate_dwell_ttis)");
  }
  if (cfg.plate_gap_ttis < 0) throw ConfigError("traffic: plate_gap_ttis must be non-negative");
  if (cfg.conventional_delay_range.lo < 1 ||
      cfg.conventional_delay_range.lo > cfg.conventional_delay_range.hi) {
    throw ConfigError("traffic: conventional_delay_range must be a positive interval");
  }
  if (!(cfg.cell_length_m > 0.0) || !(cfg.line_width_m > 0.0)) {
    throw ConfigError("traffic: cell dimensions must be positive");
  }
  if (!(cfg.floor_width_m >= cfg.line_width_m)) {
    throw ConfigError("traffic: floor_width_m must be at least line_width_m");
  }
  if (cfg.dynamics_resample_trials < 0) {
    throw ConfigError("traffic: dynamics_resample_trials must be non-negative");
  }
}

TrafficConfig desk_scale_traffic() { return TrafficConfig{}; }

TrafficConfig table1_traffic() {
  TrafficConfig cfg;
  cfg.n_per_type = {120, 120, 120, 100, 300};
  cfg.cells = 40;
  return cfg;
}

std::mt19937_64 make_rng(std::uint64_t seed, std::uint64_t stream) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(stream),
                    static_cast<std::uint32_t>(stream >> 32)};
  return std::mt19937_64(seq);
}

std::vector<Node> build_topology(const TrafficConfig& cfg) {
  validate(cfg);
  auto rng = make_rng(cfg.seed, kTopologyStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double length = cfg.line_length();

  std::vector<Node> nodes;
  nodes.reserve(cfg.total_nodes());
  NodeId next_id = 1;
  for (std::size_t t = 0; t < kNumSensingTypes; ++t) {
    const auto type = static_cast<SensingType>(t);
    const int count = cfg.n_per_type[t];
    for (int i = 0; i < count; ++i) {
      Node node;
      node.id = next_id++;
      node.type = type;
      switch (type) {
        case SensingType::kTemperature:
        case SensingType::kHumidity:
        case SensingType::kPressure: {
          const int cell = i % cfg.cells;
          node.cell = cell;
          node.location.x = (cell + unit(rng)) * cfg.cell_length_m;
          node.location.y = unit(rng) * cfg.line_width_m;
          break;
        }
        case SensingType::kVibration: {
          node.location.x = (i + 0.5) * length / count;
          node.location.y = 0.5 * cfg.line_width_m;
          node.cell = std::min(cfg.cells - 1,
                               static_cast<int>(node.location.x / cfg.cell_length_m));
          break;
        }
        case SensingType::kInterference:
          node.location.x = unit(rng) * length;
          node.location.y = (cfg.line_width_m - cfg.floor_width_m) / 2.0 +
                            unit(rng) * cfg.floor_width_m;
          break;
      }
      nodes.push_back(node);
    }
  }
  return nodes;
}

double TriggerTrace::probability(NodeId id, int trial, int resample_trials) const {
  const auto& blocks = node_prob.at(static_cast<std::size_t>(id - 1));
  std::size_t block = resample_trials > 0 ? static_cast<std::size_t>(trial / resample_trials) : 0;
  return blocks.at(std::min(block, blocks.size() - 1));
}

TriggerTrace generate_triggers(std::span<const Node> nodes, const TrafficConfig& cfg,
                               int n_trials) {
  validate(cfg);
  if (n_trials < 1) throw ConfigError("generate_triggers: n_trials must be at least 1");
  auto rng = make_rng(cfg.seed, kTriggerStream);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> dyn(cfg.dynamics_range.lo, cfg.dynamics_range.hi);
  std::uniform_int_distribution<Tti> jitter(0, cfg.trigger_jitter_ttis);

  const int blocks = cfg.dynamics_resample_trials > 0
                         ? (n_trials + cfg.dynamics_resample_trials - 1) / cfg.dynamics_resample_trials
                         : 1;
  TriggerTrace trace;
  trace.node_prob.resize(nodes.size());
  for (const Node& node : nodes) {
    auto& probs = trace.node_prob.at(static_cast<std::size_t>(node.id - 1));
    for (int b = 0; b < blocks; ++b) {
      probs.push_back(node.type == SensingType::kInterference ? cfg.interference_prob : dyn(rng));
    }
  }

  const Tti period = cfg.plate_period();
  const Tti line = cfg.line_ttis();
  for (int trial = 0; trial < n_trials; ++trial) {
    const Tti start = trial * period;
    for (const Node& node : nodes) {
      if (node.type == SensingType::kInterference) continue;
      const double p = trace.probability(node.id, trial, cfg.dynamics_resample_trials);
      // Draw both variates unconditionally so the stream layout does not
      // depend on the outcome.
      const bool fires = unit(rng) < p;
      const Tti offset = jitter(rng);
      if (!fires) continue;
      Tti tti = 0;
      if (node.type == SensingType::kVibration) {
        tti = start + static_cast<Tti>(std::floor(node.location.x / cfg.line_length() * line));
        tti = std::min(tti, start + line - 1);
      } else {
        tti = start + static_cast<Tti>(*node.cell) * cfg.plate_dwell_ttis + offset;
      }
      trace.events.push_back({node.id, tti, node.type, trial});
    }
  }

  // Interference: per-TTI Bernoulli with the rate that gives `interference_prob`
  // over one plate period. A node stays silent until its previous packet must
  // have been delivered.
  const Tti horizon = n_trials * period;
  const Tti refractory = cfg.conventional_delay_range.hi + 1;
  if (cfg.interference_prob > 0.0) {
    const double q = cfg.interference_prob >= 1.0
                         ? 1.0
                         : 1.0 - std::pow(1.0 - cfg.interference_prob, 1.0 / period);
    for (const Node& node : nodes) {
      if (node.type != SensingType::kInterference) continue;
      std::geometric_distribution<Tti> gap(q);
      Tti t = gap(rng);
      while (t < horizon) {
        trace.events.push_back({node.id, t, node.type, static_cast<int>(t / period)});
        t += refractory + gap(rng);
      }
    }
  }

  std::sort(trace.events.begin(), trace.events.end(), [](const auto& a, const auto& b) {
    return a.trigger_tti != b.trigger_tti ? a.trigger_tti < b.trigger_tti : a.node_id < b.node_id;
  });
  return trace;
}

Tti conventional_access_delay(std::mt19937_64& rng, TtiRange range) {
  std::uniform_int_distribution<Tti> dist(range.lo, range.hi);
  return dist(rng);
}

const Node& node_by_id(std::span<const Node> nodes, NodeId id) {
  if (id >= 1 && static_cast<std::size_t>(id) <= nodes.size() && nodes[id - 1].id == id) {
    return nodes[id - 1];
  }
  auto it = std::find_if(nodes.begin(), nodes.end(), [id](const Node& n) { return n.id == id; });
  if (it == nodes.end()) throw DataError("unknown node id " + std::to_string(id));
  return *it;
}

void write_topology_csv(std::ostream& out, std::span<const Node> nodes) {
  out << "node_id,type,x,y,cell\n";
  for (const Node& n : nodes) {
    out << n.id << ',' << to_string(n.type) << ',' << csv::format_double(n.location.x) << ','
        << csv::format_double(n.location.y) << ',';
    if (n.cell) out << *n.cell;
    out << '\n';
  }
}

void write_trigger_csv(std::ostream& out, std::span<const TriggerEvent> events) {
  out << "trial,tti,node_id\n";
  for (const auto& e : events) out << e.trial << ',' << e.trigger_tti << ',' << e.node_id << '\n';
}

}  // namespace dpre
