#include "dpre/dynamic_stage.h"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "dpre/errors.h"

namespace dpre {

double UtilityParams::c() const {
  const double e = std::exp(criticality * delay_threshold);
  return (1.0 + e) / e;
}

double UtilityParams::d() const {
  return 1.0 / (1.0 + std::exp(criticality * delay_threshold));
}

std::optional<UtilityParams> qos_for(SensingType type) {
  // (threshold ms, criticality) per sensing type.
  switch (type) {
    case SensingType::kTemperature: return UtilityParams{0.8, 8.0};
    case SensingType::kHumidity: return UtilityParams{0.45, 12.0};
    case SensingType::kPressure: return UtilityParams{0.4, 16.0};
    case SensingType::kVibration: return UtilityParams{0.6, 10.0};
    case SensingType::kInterference: return std::nullopt;
  }
  return std::nullopt;
}

double utility(const UtilityParams& params, double latency) {
  const double a = params.criticality;
  const double b = params.delay_threshold;
  const double sigmoid = 1.0 / (1.0 + std::exp(-a * (latency - b)));
  const double u = 1.0 - params.c() * (sigmoid - params.d());
  return std::clamp(u, 0.0, 1.0);
}

std::map<NodeId, int> allocate_shares(std::span<const Share> shares, int n_res) {
  std::map<NodeId, int> out;
  if (shares.empty() || n_res <= 0) {
    for (const auto& s : shares) out[s.candidate] = 0;
    return out;
  }
  double total = 0.0;
  for (const auto& s : shares) total += std::max(0.0, s.weight);
  const bool equal = !(total > 0.0);

  struct Quota {
    NodeId id;
    int base;
    double frac;
  };
  std::vector<Quota> quotas;
  int assigned = 0;
  for (const auto& s : shares) {
    const double w = equal ? 1.0 : std::max(0.0, s.weight);
    const double denom = equal ? static_cast<double>(shares.size()) : total;
    const double q = w / denom * n_res;
    const int base = static_cast<int>(std::floor(q));
    quotas.push_back({s.candidate, base, q - base});
    assigned += base;
  }
  std::vector<std::size_t> order(quotas.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (std::abs(quotas[a].frac - quotas[b].frac) > 1e-9) return quotas[a].frac > quotas[b].frac;
    return quotas[a].id < quotas[b].id;
  });
  int remainder = std::max(0, n_res - assigned);
  for (std::size_t i = 0; i < order.size() && remainder > 0; ++i, --remainder) {
    quotas[order[i]].base += 1;
  }
  for (std::size_t i = 0; i < quotas.size(); ++i) {
    out[quotas[i].id] = std::clamp(quotas[i].base, 0, std::max(0, shares[i].cap));
  }
  return out;
}

std::map<NodeId, int> allocate_reserved(std::span<const NodeId> candidates, const StaticPlan& plan,
                                        int n_res) {
  std::vector<Share> shares;
  shares.reserve(candidates.size());
  for (NodeId y : candidates) {
    shares.push_back({y, plan.score_sum(y), static_cast<int>(plan.reservation_set(y).size())});
  }
  return allocate_shares(shares, n_res);
}

std::vector<Arm> enumerate_arms(std::span<const NodeId> pool, int size) {
  std::vector<NodeId> sorted(pool.begin(), pool.end());
  std::sort(sorted.begin(), sorted.end());
  const int n = static_cast<int>(sorted.size());
  std::vector<Arm> arms;
  if (size <= 0 || size > n) return arms;
  std::vector<int> idx(size);
  std::iota(idx.begin(), idx.end(), 0);
  while (true) {
    Arm arm;
    arm.reserve(size);
    for (int i : idx) arm.push_back(sorted[i]);
    arms.push_back(std::move(arm));
    int i = size - 1;
    while (i >= 0 && idx[i] == n - size + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < size; ++j) idx[j] = idx[j - 1] + 1;
  }
  return arms;
}

std::vector<double> arm_prior(const BayesModel& model, NodeId y, std::span<const Arm> arms) {
  if (arms.empty()) throw ConfigError("arm_prior: no arms");
  std::vector<double> logp;
  logp.reserve(arms.size());
  for (const Arm& arm : arms) {
    double lp = 0.0;
    for (NodeId x : arm) lp += std::log(model.cond_prob(x, y));
    logp.push_back(lp);
  }
  const double top = *std::max_element(logp.begin(), logp.end());
  double sum = 0.0;
  for (double& v : logp) {
    v = std::exp(v - top);
    sum += v;
  }
  for (double& v : logp) v /= sum;
  return logp;
}

std::vector<double> uniform_prior(std::size_t k) {
  return std::vector<double>(k, 1.0 / static_cast<double>(k));
}

std::size_t sample_index(std::span<const double> probs, std::mt19937_64& rng) {
  std::discrete_distribution<std::size_t> dist(probs.begin(), probs.end());
  return dist(rng);
}

ArmFeedback make_feedback(const Arm& chosen, const std::map<NodeId, double>& served) {
  ArmFeedback fb;
  fb.hits = served;
  for (NodeId x : chosen) {
    if (!served.count(x)) fb.failures.insert(x);
  }
  return fb;
}

double drp_reward(const Arm& chosen, const ArmFeedback& feedback, int delta, double beta) {
  if (delta <= 0) return 0.0;
  double gain = 0.0;
  int misses = 0;
  for (NodeId x : chosen) {
    auto it = feedback.hits.find(x);
    if (it != feedback.hits.end()) {
      gain += it->second;
    } else {
      ++misses;
    }
  }
  return std::clamp((gain - beta * misses) / delta, 0.0, 1.0);
}

double drp_estimate_others(const Arm& arm, const ArmFeedback& feedback, int delta, double beta,
                           double chosen_reward) {
  if (delta <= 0) return 0.0;
  double gain = 0.0;
  int observed_failures = 0;
  for (NodeId x : arm) {
    auto it = feedback.hits.find(x);
    if (it != feedback.hits.end()) gain += it->second;
    if (feedback.failures.count(x)) ++observed_failures;
  }
  const double estimate = (gain - beta * observed_failures) / delta;
  return std::clamp(std::min(estimate, chosen_reward), 0.0, 1.0);
}

std::vector<double> mixed_probabilities(std::span<const double> weights,
                                        std::span<const double> prior, double gamma) {
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  std::vector<double> p(weights.size());
  for (std::size_t i = 0; i < weights.size(); ++i) {
    p[i] = (1.0 - gamma) * weights[i] / total + gamma * prior[i];
  }
  return p;
}

ArmTable::ArmTable(std::vector<NodeId> pool, std::vector<Arm> arms, std::vector<double> prior)
    : pool_(std::move(pool)), arms_(std::move(arms)), log_weights_(arms_.size(), 0.0) {
  if (arms_.empty()) throw ConfigError("ArmTable: no arms");
  set_prior(std::move(prior));
}

void ArmTable::set_prior(std::vector<double> prior) {
  if (prior.size() != arms_.size()) throw ConfigError("ArmTable: prior size mismatch");
  prior_ = std::move(prior);
}

std::vector<double> ArmTable::weights() const {
  const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
  std::vector<double> w(log_weights_.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(log_weights_[i] - top);
  return w;
}

void ArmTable::scale_weights(double factor) {
  if (!(factor > 0.0)) throw ConfigError("scale_weights: factor must be positive");
  const double shift = std::log(factor);
  for (double& lw : log_weights_) lw += shift;
}

std::vector<double> ArmTable::drp_probabilities(double gamma) const {
  return mixed_probabilities(weights(), prior_, gamma);
}

std::vector<double> ArmTable::exp3_probabilities(double gamma) const {
  return mixed_probabilities(weights(), uniform_prior(arms_.size()), gamma);
}

void ArmTable::drp_update(std::span<const double> probs, std::size_t chosen,
                          std::span<const double> rewards, double gamma) {
  const double k = static_cast<double>(arms_.size());
  for (std::size_t i = 0; i < arms_.size(); ++i) {
    const double p = probs[i];
    const double denom = i == chosen ? p : std::max(p, 1.0 - p);
    if (!(denom > 0.0)) continue;
    log_weights_[i] += gamma * (rewards[i] / denom) / k;
  }
  ++trials_;
  normalize();
}

void ArmTable::exp3_update(std::span<const double> probs, std::size_t chosen, double reward,
                           double gamma) {
  const double p = probs[chosen];
  if (p > 0.0) log_weights_[chosen] += gamma * (reward / p) / static_cast<double>(arms_.size());
  ++trials_;
  normalize();
}

void ArmTable::normalize() {
  const double top = *std::max_element(log_weights_.begin(), log_weights_.end());
  for (double& lw : log_weights_) lw -= top;
}

Selection drp_select(const ArmTable& table, double gamma, std::mt19937_64& rng) {
  Selection s;
  s.probs = table.drp_probabilities(gamma);
  s.arm = sample_index(s.probs, rng);
  return s;
}

Selection exp3_select(const ArmTable& table, double gamma, std::mt19937_64& rng) {
  Selection s;
  s.probs = table.exp3_probabilities(gamma);
  s.arm = sample_index(s.probs, rng);
  return s;
}

DrpState::DrpState(double gamma, double beta) : gamma_(gamma), beta_(beta) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(beta >= 0.0)) throw ConfigError("beta must be non-negative");
}

ArmTable& DrpState::table(NodeId y, std::span<const NodeId> pool, int delta,
                          const BayesModel* prior_model) {
  std::vector<NodeId> sorted(pool.begin(), pool.end());
  std::sort(sorted.begin(), sorted.end());
  const auto key = std::make_pair(y, delta);
  auto it = tables_.find(key);
  if (it == tables_.end() || it->second.pool() != sorted) {
    auto arms = enumerate_arms(sorted, delta);
    auto prior = prior_model ? arm_prior(*prior_model, y, arms) : uniform_prior(arms.size());
    ArmTable fresh(sorted, std::move(arms), std::move(prior));
    if (it == tables_.end()) {
      it = tables_.emplace(key, std::move(fresh)).first;
    } else {
      it->second = std::move(fresh);
    }
  } else if (prior_model) {
    it->second.set_prior(arm_prior(*prior_model, y, it->second.arms()));
  }
  return it->second;
}

}  // namespace dpre
