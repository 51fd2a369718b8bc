#include "dpre/static_stage.h"

#include <algorithm>
#include <ostream>
#include <set>

#include "dpre/csv.h"
#include "dpre/errors.h"

namespace dpre {

double StaticConfig::alpha_for(Metric metric) const {
  auto it = alpha.find(metric);
  if (it == alpha.end()) {
    throw ConfigError("no threshold configured for metric " + std::string(to_string(metric)));
  }
  return it->second;
}

void validate(const StaticConfig& cfg) {
  if (cfg.xi < 1) throw ConfigError("static: xi must be at least 1");
  for (const auto& [metric, a] : cfg.alpha) {
    if (!(a >= 0.0)) throw ConfigError("static: alpha must be non-negative");
  }
}

const std::vector<ScoredNode>& StaticPlan::reservation_set(NodeId y) const {
  auto it = reservation_sets.find(y);
  if (it == reservation_sets.end()) {
    throw LookupError("node " + std::to_string(y) + " is not a reservation candidate");
  }
  return it->second;
}

double StaticPlan::score_sum(NodeId y) const {
  double s = 0.0;
  for (const auto& n : reservation_set(y)) s += n.score;
  return s;
}

std::map<NodeId, std::vector<NodeId>> feature_sets(std::span<const AccessSample> corpus) {
  std::map<NodeId, std::set<NodeId>> sets;
  for (const auto& s : corpus) {
    auto& set = sets[s.label];
    set.insert(s.features.begin(), s.features.end());
  }
  std::map<NodeId, std::vector<NodeId>> out;
  for (auto& [label, set] : sets) out[label].assign(set.begin(), set.end());
  return out;
}

std::vector<ScoredNode> rank_features(const BayesModel& model, Metric metric, NodeId label,
                                      std::span<const NodeId> features) {
  std::vector<ScoredNode> ranked;
  ranked.reserve(features.size());
  for (NodeId x : features) ranked.push_back({x, score(model, metric, x, label)});
  std::sort(ranked.begin(), ranked.end(), [](const ScoredNode& a, const ScoredNode& b) {
    return a.score != b.score ? a.score > b.score : a.node < b.node;
  });
  return ranked;
}

StaticPlan build_plan(const BayesModel& model, std::span<const AccessSample> corpus, Metric metric,
                      const StaticConfig& cfg) {
  validate(cfg);
  StaticPlan plan;
  plan.metric = metric;
  plan.alpha = cfg.alpha_for(metric);
  plan.xi = cfg.xi;
  for (const auto& [label, features] : feature_sets(corpus)) {
    if (features.empty()) continue;
    auto ranked = rank_features(model, metric, label, features);
    if (ranked.front().score < plan.alpha) continue;
    if (ranked.size() > static_cast<std::size_t>(cfg.xi)) ranked.resize(cfg.xi);
    plan.candidates.push_back(label);
    plan.reservation_sets.emplace(label, std::move(ranked));
  }
  return plan;
}

std::pair<BayesModel, StaticPlan> epoch_step(std::span<const AccessSample> corpus,
                                             std::span<const NodeId> vocab, Metric metric,
                                             const StaticConfig& cfg) {
  BayesModel model = BayesModel::train(corpus, vocab);
  StaticPlan plan = build_plan(model, corpus, metric, cfg);
  return {std::move(model), std::move(plan)};
}

void write_plan_csv(std::ostream& out, const StaticPlan& plan) {
  out << "candidate,rank,node,score,metric,alpha,xi\n";
  for (NodeId y : plan.candidates) {
    const auto& set = plan.reservation_set(y);
    for (std::size_t r = 0; r < set.size(); ++r) {
      out << y << ',' << r + 1 << ',' << set[r].node << ',' << csv::format_double(set[r].score)
          << ',' << to_string(plan.metric) << ',' << csv::format_double(plan.alpha) << ','
          << plan.xi << '\n';
    }
  }
}

std::map<NodeId, double> max_feature_scores(const BayesModel& model,
                                            std::span<const AccessSample> corpus, Metric metric) {
  std::map<NodeId, double> out;
  for (const auto& [label, features] : feature_sets(corpus)) {
    if (features.empty()) continue;
    out[label] = rank_features(model, metric, label, features).front().score;
  }
  return out;
}

std::vector<ThresholdErrorPoint> threshold_error_curve(const std::map<NodeId, double>& max_score,
                                                       std::span<const Node> nodes,
                                                       std::span<const double> alphas) {
  std::vector<double> interference;
  std::vector<double> correlated;
  for (const auto& [label, s] : max_score) {
    if (node_by_id(nodes, label).type == SensingType::kInterference) {
      interference.push_back(s);
    } else {
      correlated.push_back(s);
    }
  }
  std::vector<ThresholdErrorPoint> curve;
  for (double a : alphas) {
    ThresholdErrorPoint pt{a, 0.0, 0.0};
    if (!interference.empty()) {
      auto admitted = std::count_if(interference.begin(), interference.end(),
                                    [a](double s) { return s >= a; });
      pt.interference_admit_rate = static_cast<double>(admitted) / interference.size();
    }
    if (!correlated.empty()) {
      auto rejected = std::count_if(correlated.begin(), correlated.end(),
                                    [a](double s) { return s < a; });
      pt.correlated_reject_rate = static_cast<double>(rejected) / correlated.size();
    }
    curve.push_back(pt);
  }
  return curve;
}

}  // namespace dpre
