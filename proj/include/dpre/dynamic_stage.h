#pragma once

#include <map>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <utility>
#include <vector>

#include "dpre/correlation.h"
#include "dpre/static_stage.h"

namespace dpre {

// ---- Sigmoidal utility ------------------------------------------------------

struct UtilityParams {
  double criticality = 1.0;      // a_x
  double delay_threshold = 1.0;  // b_x, TTIs; inflection point

  double c() const;  // (1 + e^{ab}) / e^{ab}
  double d() const;  // 1 / (1 + e^{ab})
};

// Per-type QoS tuples; interference nodes carry no deadline.
std::optional<UtilityParams> qos_for(SensingType type);

// 1 at zero latency, decays to 0, inflection at the delay threshold.
double utility(const UtilityParams& params, double latency);

// ---- Reserved-RB split ------------------------------------------------------

struct Share {
  NodeId candidate = 0;
  double weight = 0.0;
  int cap = 0;  // upper bound on the allocation
};

// Largest-remainder rounding of weight-proportional quotas of `n_res`;
// remainder ties go to the smaller id. Equal split when every weight is 0.
std::map<NodeId, int> allocate_shares(std::span<const Share> shares, int n_res);

// Weights are the candidates' summed reservation-set scores; caps are |R(y)|.
std::map<NodeId, int> allocate_reserved(std::span<const NodeId> candidates, const StaticPlan& plan,
                                        int n_res);

// ---- Arms -------------------------------------------------------------------

using Arm = std::vector<NodeId>;  // ascending node ids

// All `size`-subsets of `pool` in lexicographic order of the sorted pool.
std::vector<Arm> enumerate_arms(std::span<const NodeId> pool, int size);

// Normalized product of phi_{x|y} over each arm's members.
std::vector<double> arm_prior(const BayesModel& model, NodeId y, std::span<const Arm> arms);
std::vector<double> uniform_prior(std::size_t k);

std::size_t sample_index(std::span<const double> probs, std::mt19937_64& rng);

// ---- Rewards ----------------------------------------------------------------

// What one trial revealed: nodes served in pre-allocated RBs during the
// trial's window (with the utility of their delivery) and the chosen arm's
// members that were not served.
struct ArmFeedback {
  std::map<NodeId, double> hits;
  std::set<NodeId> failures;
};

ArmFeedback make_feedback(const Arm& chosen, const std::map<NodeId, double>& served);

double drp_reward(const Arm& chosen, const ArmFeedback& feedback, int delta, double beta);

// Reward estimate for an arm that was not played: only observed hits are
// credited and only observed failures are penalized, capped by the chosen
// arm's reward.
double drp_estimate_others(const Arm& arm, const ArmFeedback& feedback, int delta, double beta,
                           double chosen_reward);

// ---- Exponential-weight learners -------------------------------------------

// (1 - gamma) w / sum(w) + gamma * prior
std::vector<double> mixed_probabilities(std::span<const double> weights,
                                        std::span<const double> prior, double gamma);

// Weight table for one candidate and one subset size.
class ArmTable {
 public:
  ArmTable(std::vector<NodeId> pool, std::vector<Arm> arms, std::vector<double> prior);

  const std::vector<NodeId>& pool() const { return pool_; }
  const std::vector<Arm>& arms() const { return arms_; }
  const std::vector<double>& prior() const { return prior_; }
  std::size_t size() const { return arms_.size(); }
  int trials() const { return trials_; }

  void set_prior(std::vector<double> prior);

  // Weights scaled so the largest is 1.
  std::vector<double> weights() const;
  // Multiplies every weight by `factor` (> 0); probabilities are unaffected.
  void scale_weights(double factor);

  // Exploration mixes in the table prior.
  std::vector<double> drp_probabilities(double gamma) const;
  // Exploration is uniform over arms.
  std::vector<double> exp3_probabilities(double gamma) const;

  // Importance-weighted update of every arm: r/P for the chosen arm,
  // r/max(P, 1-P) for the rest, then w *= exp(gamma * r_hat / K).
  void drp_update(std::span<const double> probs, std::size_t chosen,
                  std::span<const double> rewards, double gamma);
  // Only the chosen arm moves: w *= exp(gamma * (r/P) / K).
  void exp3_update(std::span<const double> probs, std::size_t chosen, double reward, double gamma);

 private:
  void normalize();

  std::vector<NodeId> pool_;
  std::vector<Arm> arms_;
  std::vector<double> prior_;
  std::vector<double> log_weights_;
  int trials_ = 0;
};

struct Selection {
  std::size_t arm = 0;
  std::vector<double> probs;
};

Selection drp_select(const ArmTable& table, double gamma, std::mt19937_64& rng);
Selection exp3_select(const ArmTable& table, double gamma, std::mt19937_64& rng);

// Per-(candidate, subset size) tables, created on first use.
class DrpState {
 public:
  DrpState(double gamma, double beta);

  double gamma() const { return gamma_; }
  double beta() const { return beta_; }

  // Returns the table for (y, delta) over `pool`. A table whose pool no longer
  // matches is rebuilt; `prior` (nullptr for uniform) refreshes the prior.
  ArmTable& table(NodeId y, std::span<const NodeId> pool, int delta, const BayesModel* prior_model);

  std::size_t table_count() const { return tables_.size(); }

 private:
  double gamma_;
  double beta_;
  std::map<std::pair<NodeId, int>, ArmTable> tables_;
};

}  // namespace dpre
