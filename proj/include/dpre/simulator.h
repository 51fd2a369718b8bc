#pragma once

#include <cstdint>
#include <deque>
#include <iosfwd>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dpre/correlation.h"
#include "dpre/dynamic_stage.h"
#include "dpre/samples.h"
#include "dpre/static_stage.h"
#include "dpre/topology.h"

namespace dpre {

enum class Algorithm {
  kDPre,       // static stage + DRP with per-type utilities
  kDPreNoQos,  // same, every delivered packet earns utility 1
  kExp3,       // static stage + uniform-exploration EXP3
  kStatic,     // static stage only: top-scored members of R(y)
  kAPre,       // nearest neighbours of every accessor, no learning
  kAPreD,      // nearest-neighbour pools with DRP on top
};

std::string_view to_string(Algorithm algo);
Algorithm parse_algorithm(std::string_view name);

struct RunConfig {
  int n_res = 6;
  Metric metric = Metric::kChiSquare;
  Algorithm algo = Algorithm::kDPre;
  double gamma = 0.3;
  double beta = 0.1;
  StaticConfig static_cfg;
  SampleConfig sample_cfg;
  TrafficConfig traffic;
  int n_trials = 100;
  // Conventional-only plates simulated before the first static stage.
  int bootstrap_trials = 100;
  // TTIs a reservation stays usable before it counts as wasted.
  Tti reservation_window = 5;
  // Accessors of the last `candidate_lookback` TTIs form the candidate set.
  Tti candidate_lookback = 1;
  // Arm members that accessed within this many TTIs get no RB.
  Tti recent_access_guard = 25;
  // Pool size of the nearest-neighbour baselines' reservation sets.
  int adjacency_set_size = 8;
  std::uint64_t seed = 1;
};

// Throws ConfigError. n_res = 0 is accepted here (every access is then
// conventional); the experiment front-end requires n_res >= 1.
void validate(const RunConfig& cfg);

struct ScheduledTrigger {
  NodeId node = 0;
  Tti trigger_tti = 0;
  Tti conventional_delay = 0;  // TTIs until the SR path delivers
};

struct ReservationEntry {
  Tti tti = 0;  // issue TTI
  int trial = 0;
  NodeId candidate = 0;
  NodeId node = 0;
  bool hit = false;
  Tti latency = 0;                 // valid when hit
  std::optional<double> deadline;  // delay threshold of the node's type
};

struct DecisionEntry {
  Tti tti = 0;
  int trial = 0;
  NodeId candidate = 0;
  Arm members;
  int hits = 0;
  int misses = 0;
  double reward = 0.0;
};

struct TtiState {
  Tti tti = 0;
  std::vector<NodeId> theta;
  std::vector<std::pair<NodeId, NodeId>> omega;  // (reserved node, owning candidate)
  std::vector<int> deltas;                       // parallel to theta
  std::vector<NodeId> s_set;                     // pre-allocated accesses
  std::vector<NodeId> c_set;                     // conventional accesses
  std::size_t pending = 0;
};

struct SimLog {
  std::vector<AccessRecord> accesses;  // chronological
  std::vector<ReservationEntry> reservations;
  std::vector<DecisionEntry> decisions;
  std::size_t max_omega = 0;
  std::size_t max_active_reservations = 0;
  int max_delta_sum = 0;
};

// Per-TTI loop of the dynamic stage. Triggers are known to the simulator but
// the scheduler only observes accesses.
class Simulator {
 public:
  // `trial_period` maps TTIs to trials: trial = tti / trial_period - trial_offset + 1.
  Simulator(std::vector<Node> nodes, std::vector<ScheduledTrigger> triggers, RunConfig cfg,
            Tti trial_period, int trial_offset);

  // Swaps in a new epoch's plan and model.
  void set_plan(std::shared_ptr<const StaticPlan> plan, std::shared_ptr<const BayesModel> model);
  // While disabled every trigger takes the conventional path.
  void set_reservations_enabled(bool enabled) { enabled_ = enabled; }

  const TtiState& step();
  Tti now() const { return now_; }
  bool done() const;

  const SimLog& log() const { return log_; }
  const std::vector<Node>& nodes() const { return nodes_; }
  std::size_t trigger_count() const { return triggers_.size(); }
  int trial_of(Tti tti) const;

 private:
  struct Pending {
    Tti trigger_tti = 0;
    Tti delay = 0;
  };
  struct Decision {
    NodeId candidate = 0;
    int delta = 0;
    std::vector<NodeId> pool;
    bool learns = false;
    std::size_t arm = 0;
    Arm members;
    std::vector<double> probs;
    Tti issue = 0;
    Tti resolve = 0;
    std::size_t log_index = 0;
  };
  struct PreAccess {
    Tti tti;
    NodeId node;
    double utility;
  };

  std::vector<NodeId> collect_candidates() const;
  // Already reserved this TTI or holding a live reservation.
  bool taken(NodeId x, const std::vector<char>& in_omega) const;
  bool recently_accessed(NodeId x) const;
  void place(NodeId owner, NodeId x, std::vector<char>& in_omega);
  void select_learning(NodeId y, int delta, std::span<const NodeId> pool,
                       const BayesModel* prior_model, std::vector<char>& in_omega);
  void resolve(const Decision& d);
  double reward_utility(const Node& node, Tti latency) const;
  void serve(NodeId x, AccessPath path, Tti latency);

  std::vector<Node> nodes_;
  std::vector<ScheduledTrigger> triggers_;
  RunConfig cfg_;
  Tti trial_period_;
  int trial_offset_;
  bool enabled_ = true;

  std::shared_ptr<const StaticPlan> plan_;
  std::shared_ptr<const BayesModel> model_;
  DrpState drp_;
  std::mt19937_64 rng_;
  std::vector<std::vector<NodeId>> nearest_;  // by node index, ascending distance then id

  Tti now_ = 0;
  std::size_t next_trigger_ = 0;
  std::vector<std::optional<Pending>> pending_;
  std::vector<std::optional<std::size_t>> active_;  // reservation log index per node
  std::vector<Tti> last_access_;
  std::vector<std::size_t> active_list_;            // reservation indices still open
  std::deque<Decision> decisions_;
  std::deque<PreAccess> recent_pre_;
  std::deque<std::pair<Tti, NodeId>> recent_access_;
  std::size_t served_ = 0;
  TtiState state_;
  SimLog log_;
};

struct TrialStats {
  int trial = 0;
  double accuracy = 0.0;
  double qos_accuracy = 0.0;
  double mean_latency = 0.0;
  double mean_utility = 0.0;
  int reservations = 0;
  int hits = 0;
  int accesses = 0;
};

struct RunReport {
  RunConfig config;
  std::vector<TrialStats> trials;  // trials 1..n_trials of the dynamic stage
  SimLog log;
  std::size_t trigger_count = 0;
  StaticPlan first_plan;
  int epochs_trained = 0;
};

RunReport run(const RunConfig& cfg);

// Per-trial hits / reservations for trials 1..n_trials; 0 when a trial made
// no reservations. With `qos_aware` a hit also needs latency <= deadline.
std::vector<double> accuracy(std::span<const ReservationEntry> reservations, int n_trials,
                             bool qos_aware);
std::vector<double> accuracy(const RunReport& report, bool qos_aware);

// Nearest `count` nodes to `y` (excluding y) by Euclidean distance, ties by id.
std::vector<NodeId> nearest_nodes(std::span<const Node> nodes, NodeId y, std::size_t count);

// The canonical text form of every RunConfig field except the seed; hashing
// it gives the config hash carried by output files, so a row is identified
// by (config hash, seed).
std::string canonical_config(const RunConfig& cfg);
std::string config_hash(const RunConfig& cfg);
std::string fnv1a_hex(std::string_view text);

void write_trial_csv(std::ostream& out, const RunReport& report);
void write_tti_csv(std::ostream& out, const RunReport& report);

}  // namespace dpre
