#include "dpre/correlation.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <string>

#include "dpre/csv.h"
#include "dpre/errors.h"

namespace dpre {
namespace {

constexpr double kSumTolerance = 1e-9;

struct Table2x2 {
  // joint[i][j]: i indexes {x, not x}, j indexes {y, not y}
  std::array<std::array<double, 2>, 2> joint{};
  std::array<double, 2> px{};
  std::array<double, 2> py{};
};

Table2x2 contingency(const BayesModel& model, NodeId x, NodeId y) {
  Table2x2 t;
  const double phi_y = model.class_prior(y);
  const double phi_xy = model.cond_prob(x, y);
  const double x_not_y = model.marginal_excluding(x, y);
  t.joint[0][0] = phi_xy * phi_y;
  t.joint[1][0] = (1.0 - phi_xy) * phi_y;
  t.joint[0][1] = x_not_y;
  t.joint[1][1] = std::max(0.0, (1.0 - phi_y) - x_not_y);
  t.px = {t.joint[0][0] + t.joint[0][1], t.joint[1][0] + t.joint[1][1]};
  t.py = {phi_y, 1.0 - phi_y};
  return t;
}

}  // namespace

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::kPosterior: return "P";
    case Metric::kMutualInformation: return "MI";
    case Metric::kChiSquare: return "X";
  }
  return "?";
}

Metric parse_metric(std::string_view name) {
  if (name == "P" || name == "posterior") return Metric::kPosterior;
  if (name == "MI" || name == "mutual_information") return Metric::kMutualInformation;
  if (name == "X" || name == "chi_square" || name == "chi2") return Metric::kChiSquare;
  throw ConfigError("unknown metric '" + std::string(name) + "' (expected P, MI or X)");
}

BayesModel BayesModel::train(std::span<const AccessSample> corpus, std::span<const NodeId> vocab) {
  if (corpus.empty()) throw TrainingError("cannot train on an empty corpus");
  if (vocab.empty()) throw TrainingError("cannot train with an empty vocabulary");
  BayesModel m;
  m.vocab_.assign(vocab.begin(), vocab.end());
  std::sort(m.vocab_.begin(), m.vocab_.end());
  m.vocab_.erase(std::unique(m.vocab_.begin(), m.vocab_.end()), m.vocab_.end());
  for (std::size_t i = 0; i < m.vocab_.size(); ++i) m.index_[m.vocab_[i]] = i;

  const std::size_t v = m.vocab_.size();
  std::vector<double> counts(v * v, 0.0);
  std::vector<double> tokens(v, 0.0);
  std::vector<double> labels(v, 0.0);
  for (const auto& s : corpus) {
    const std::size_t q = m.index_of(s.label);
    labels[q] += 1.0;
    for (NodeId f : s.features) {
      counts[q * v + m.index_of(f)] += 1.0;
      tokens[q] += 1.0;
    }
  }
  m.n_samples_ = static_cast<double>(corpus.size());
  m.cond_.resize(v * v);
  m.prior_.resize(v);
  for (std::size_t q = 0; q < v; ++q) {
    const double denom = tokens[q] + static_cast<double>(v);
    for (std::size_t p = 0; p < v; ++p) m.cond_[q * v + p] = (counts[q * v + p] + 1.0) / denom;
    m.prior_[q] = labels[q] / m.n_samples_;
  }
  m.finish();
  return m;
}

BayesModel BayesModel::from_parameters(std::vector<NodeId> vocab,
                                       std::vector<std::vector<double>> cond,
                                       std::vector<double> prior, double n_samples) {
  const std::size_t v = vocab.size();
  if (v == 0 || cond.size() != v || prior.size() != v) {
    throw TrainingError("from_parameters: dimension mismatch");
  }
  if (!(n_samples > 0.0)) throw TrainingError("from_parameters: n_samples must be positive");
  BayesModel m;
  m.vocab_ = std::move(vocab);
  for (std::size_t i = 0; i < v; ++i) {
    if (!m.index_.emplace(m.vocab_[i], i).second) {
      throw TrainingError("from_parameters: duplicate vocabulary entry");
    }
  }
  m.cond_.reserve(v * v);
  for (const auto& row : cond) {
    if (row.size() != v) throw TrainingError("from_parameters: ragged conditional table");
    double sum = 0.0;
    for (double p : row) {
      if (p < 0.0) throw TrainingError("from_parameters: negative probability");
      sum += p;
    }
    if (std::abs(sum - 1.0) > kSumTolerance) {
      throw TrainingError("from_parameters: conditional row does not sum to one");
    }
    m.cond_.insert(m.cond_.end(), row.begin(), row.end());
  }
  double prior_sum = 0.0;
  for (double p : prior) prior_sum += p;
  if (std::abs(prior_sum - 1.0) > kSumTolerance) {
    throw TrainingError("from_parameters: prior does not sum to one");
  }
  m.prior_ = std::move(prior);
  m.n_samples_ = n_samples;
  m.finish();
  return m;
}

void BayesModel::finish() {
  const std::size_t v = vocab_.size();
  marginal_.assign(v, 0.0);
  for (std::size_t q = 0; q < v; ++q) {
    if (prior_[q] == 0.0) continue;
    for (std::size_t p = 0; p < v; ++p) marginal_[p] += cond_[q * v + p] * prior_[q];
  }
}

std::size_t BayesModel::index_of(NodeId id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw LookupError("node " + std::to_string(id) + " is not in the vocabulary");
  return it->second;
}

double BayesModel::cond_prob(NodeId p, NodeId q) const {
  return cond_[index_of(q) * vocab_.size() + index_of(p)];
}

double BayesModel::class_prior(NodeId q) const { return prior_[index_of(q)]; }

double BayesModel::marginal(NodeId p) const { return marginal_[index_of(p)]; }

double BayesModel::marginal_excluding(NodeId p, NodeId y) const {
  const std::size_t pi = index_of(p);
  const std::size_t yi = index_of(y);
  const std::size_t v = vocab_.size();
  double sum = 0.0;
  for (std::size_t q = 0; q < v; ++q) {
    if (q == yi || prior_[q] == 0.0) continue;
    sum += cond_[q * v + pi] * prior_[q];
  }
  return sum;
}

std::vector<NodeId> BayesModel::labels() const {
  std::vector<NodeId> out;
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    if (prior_[i] > 0.0) out.push_back(vocab_[i]);
  }
  return out;
}

void BayesModel::write_conditional_csv(std::ostream& out) const {
  out << "q,p,phi_p_given_q\n";
  const std::size_t v = vocab_.size();
  for (std::size_t q = 0; q < v; ++q) {
    if (prior_[q] == 0.0) continue;
    for (std::size_t p = 0; p < v; ++p) {
      out << vocab_[q] << ',' << vocab_[p] << ',' << csv::format_double(cond_[q * v + p]) << '\n';
    }
  }
}

void BayesModel::write_prior_csv(std::ostream& out) const {
  out << "q,phi_q\n";
  for (std::size_t q = 0; q < vocab_.size(); ++q) {
    if (prior_[q] == 0.0) continue;
    out << vocab_[q] << ',' << csv::format_double(prior_[q]) << '\n';
  }
}

double posterior(const BayesModel& model, NodeId x, NodeId y) { return model.cond_prob(x, y); }

double mutual_information(const BayesModel& model, NodeId x, NodeId y) {
  const Table2x2 t = contingency(model, x, y);
  double mi = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double pj = t.joint[i][j];
      if (pj <= 0.0) continue;
      mi += pj * std::log2(pj / (t.px[i] * t.py[j]));
    }
  }
  return std::max(mi, 0.0);
}

double chi_square(const BayesModel& model, NodeId x, NodeId y) {
  const Table2x2 t = contingency(model, x, y);
  const double n = model.n_samples();
  double chi2 = 0.0;
  for (int i = 0; i < 2; ++i) {
    for (int j = 0; j < 2; ++j) {
      const double expected = n * t.px[i] * t.py[j];
      if (!(expected > 0.0)) {
        throw DegenerateModelError("chi-square: empty expected cell for (" + std::to_string(x) +
                                   "," + std::to_string(y) + ")");
      }
      const double diff = n * t.joint[i][j] - expected;
      chi2 += diff * diff / expected;
    }
  }
  return chi2;
}

double score(const BayesModel& model, Metric metric, NodeId x, NodeId y) {
  switch (metric) {
    case Metric::kPosterior: return posterior(model, x, y);
    case Metric::kMutualInformation: return mutual_information(model, x, y);
    case Metric::kChiSquare: return chi_square(model, x, y);
  }
  throw ConfigError("unknown metric");
}

}  // namespace dpre
