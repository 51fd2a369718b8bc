#pragma once

#include <iosfwd>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "dpre/samples.h"

namespace dpre {

enum class Metric { kPosterior, kMutualInformation, kChiSquare };

std::string_view to_string(Metric metric);
Metric parse_metric(std::string_view name);  // accepts P / MI / X and long names

// Multinomial-event Naive Bayes over node ids with add-one smoothing.
// Immutable after construction.
class BayesModel {
 public:
  // Throws TrainingError on an empty corpus and LookupError when a sample
  // references a node outside `vocab`.
  static BayesModel train(std::span<const AccessSample> corpus, std::span<const NodeId> vocab);

  // Builds a model from explicit parameters. `cond[q][p]` is phi_{p|q} with
  // rows and columns indexed like `vocab`. Rows and the prior must each sum
  // to one.
  static BayesModel from_parameters(std::vector<NodeId> vocab,
                                    std::vector<std::vector<double>> cond,
                                    std::vector<double> prior, double n_samples);

  double cond_prob(NodeId p, NodeId q) const;  // phi_{p|q}
  double class_prior(NodeId q) const;          // phi_q
  // P(p) = sum_q phi_{p|q} phi_q
  double marginal(NodeId p) const;
  // sum over q != y of phi_{p|q} phi_q, accumulated directly
  double marginal_excluding(NodeId p, NodeId y) const;

  double n_samples() const { return n_samples_; }
  const std::vector<NodeId>& vocab() const { return vocab_; }
  bool contains(NodeId id) const { return index_.count(id) != 0; }
  // Labels with non-zero prior, ascending.
  std::vector<NodeId> labels() const;

  void write_conditional_csv(std::ostream& out) const;  // q,p,phi_p_given_q
  void write_prior_csv(std::ostream& out) const;        // q,phi_q

 private:
  BayesModel() = default;
  std::size_t index_of(NodeId id) const;
  void finish();

  std::vector<NodeId> vocab_;
  std::unordered_map<NodeId, std::size_t> index_;
  std::vector<double> cond_;  // row-major [q][p]
  std::vector<double> prior_;
  std::vector<double> marginal_;
  double n_samples_ = 0.0;
};

double posterior(const BayesModel& model, NodeId x, NodeId y);
double mutual_information(const BayesModel& model, NodeId x, NodeId y);
double chi_square(const BayesModel& model, NodeId x, NodeId y);
double score(const BayesModel& model, Metric metric, NodeId x, NodeId y);

}  // namespace dpre
