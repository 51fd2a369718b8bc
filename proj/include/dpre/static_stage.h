#pragma once

#include <iosfwd>
#include <map>
#include <span>
#include <utility>
#include <vector>

#include "dpre/correlation.h"

namespace dpre {

struct StaticConfig {
  // Admission threshold per metric. The chi-square value follows the
  // steel-line setting; posterior and MI live on different scales.
  std::map<Metric, double> alpha{
      {Metric::kChiSquare, 50.0}, {Metric::kPosterior, 0.075}, {Metric::kMutualInformation, 0.001}};
  int xi = 8;

  double alpha_for(Metric metric) const;  // ConfigError when absent
};

void validate(const StaticConfig& cfg);

struct ScoredNode {
  NodeId node = 0;
  double score = 0.0;

  bool operator==(const ScoredNode&) const = default;
};

// Reservation candidates and their static reservation sets, ranked by score
// (descending, ties by ascending id).
struct StaticPlan {
  Metric metric = Metric::kChiSquare;
  double alpha = 0.0;
  int xi = 0;
  std::vector<NodeId> candidates;  // ascending
  std::map<NodeId, std::vector<ScoredNode>> reservation_sets;

  bool is_candidate(NodeId y) const { return reservation_sets.count(y) != 0; }
  const std::vector<ScoredNode>& reservation_set(NodeId y) const;
  double score_sum(NodeId y) const;

  bool operator==(const StaticPlan&) const = default;
};

// Distinct feature nodes observed with each label, ascending.
std::map<NodeId, std::vector<NodeId>> feature_sets(std::span<const AccessSample> corpus);

// Scores every observed (feature, label) pair, ranks, and returns the label's
// full ranking. Exposed for threshold analysis.
std::vector<ScoredNode> rank_features(const BayesModel& model, Metric metric, NodeId label,
                                      std::span<const NodeId> features);

StaticPlan build_plan(const BayesModel& model, std::span<const AccessSample> corpus, Metric metric,
                      const StaticConfig& cfg);

std::pair<BayesModel, StaticPlan> epoch_step(std::span<const AccessSample> corpus,
                                             std::span<const NodeId> vocab, Metric metric,
                                             const StaticConfig& cfg);

void write_plan_csv(std::ostream& out, const StaticPlan& plan);

// Admission error rates of the threshold rule for a family of labels.
struct ThresholdErrorPoint {
  double alpha = 0.0;
  double interference_admit_rate = 0.0;  // interference labels admitted
  double correlated_reject_rate = 0.0;   // correlated labels rejected
};

// `max_score` holds each observed label's best feature score; labels are split
// by `is_interference`.
std::vector<ThresholdErrorPoint> threshold_error_curve(
    const std::map<NodeId, double>& max_score, std::span<const Node> nodes,
    std::span<const double> alphas);

std::map<NodeId, double> max_feature_scores(const BayesModel& model,
                                            std::span<const AccessSample> corpus, Metric metric);

}  // namespace dpre
