#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "dpre/errors.h"
#include "dpre/static_stage.h"
#include "oracles.h"

using namespace dpre;

namespace {

std::vector<AccessSample> hand_corpus() {
  return {{1, {2}, 0}, {1, {2, 3}, 1}, {2, {3}, 2}};
}

const std::vector<NodeId> kVocab{1, 2, 3};

StaticConfig with_alpha(Metric m, double a, int xi = 8) {
  StaticConfig cfg;
  cfg.alpha = {{m, a}};
  cfg.xi = xi;
  return cfg;
}

}  // namespace

TEST_SUITE("static_stage") {

TEST_CASE("feature sets are the distinct observed features") {
  const auto sets = feature_sets(hand_corpus());
  CHECK(sets.at(1) == std::vector<NodeId>{2, 3});
  CHECK(sets.at(2) == std::vector<NodeId>{3});
  CHECK(sets.count(3) == 0);
}

TEST_CASE("threshold above every score leaves the plan empty") {
  const auto m = BayesModel::train(hand_corpus(), kVocab);
  const auto plan = build_plan(m, hand_corpus(), Metric::kChiSquare,
                               with_alpha(Metric::kChiSquare, 1e6));
  CHECK(plan.candidates.empty());
  CHECK(plan.reservation_sets.empty());
  CHECK_THROWS_AS(plan.reservation_set(1), LookupError);
}

TEST_CASE("hand corpus admits only the label above the threshold") {
  const auto corpus = hand_corpus();
  const auto m = BayesModel::train(corpus, kVocab);
  const auto o = oracle::train(corpus, kVocab);
  const double best1 =
      std::max(oracle::chi_square(o, 2, 1), oracle::chi_square(o, 3, 1));
  const double best2 = oracle::chi_square(o, 3, 2);
  REQUIRE(best1 != best2);
  const double alpha = 0.5 * (best1 + best2);
  const auto plan =
      build_plan(m, corpus, Metric::kChiSquare, with_alpha(Metric::kChiSquare, alpha));
  const NodeId winner = best1 > best2 ? 1 : 2;
  CHECK(plan.candidates == std::vector<NodeId>{winner});
  CHECK(plan.alpha == alpha);
}

TEST_CASE("reservation set keeps the xi best scores") {
  // Label 1 sees ten feature nodes with strictly different counts.
  std::vector<AccessSample> corpus;
  std::vector<NodeId> vocab{1};
  for (NodeId x = 2; x <= 11; ++x) vocab.push_back(x);
  for (NodeId x = 2; x <= 11; ++x) {
    for (int rep = 0; rep < x; ++rep) corpus.push_back({1, {x}, 0});
    corpus.push_back({x, {}, 0});
  }
  const auto m = BayesModel::train(corpus, vocab);
  for (Metric metric : {Metric::kPosterior, Metric::kMutualInformation, Metric::kChiSquare}) {
    const auto plan = build_plan(m, corpus, metric, with_alpha(metric, 0.0, 8));
    const auto& set = plan.reservation_set(1);
    REQUIRE(set.size() == 8);
    auto all = rank_features(m, metric, 1, feature_sets(corpus).at(1));
    REQUIRE(all.size() == 10);
    for (std::size_t i = 0; i < 8; ++i) CHECK(set[i] == all[i]);
    for (std::size_t i = 1; i < set.size(); ++i) CHECK(set[i - 1].score >= set[i].score);
    if (metric == Metric::kPosterior) CHECK(set.front().node == 11);
  }
}

TEST_CASE("xi of one keeps the argmax") {
  const auto corpus = hand_corpus();
  const auto m = BayesModel::train(corpus, kVocab);
  const auto plan = build_plan(m, corpus, Metric::kPosterior, with_alpha(Metric::kPosterior, 0, 1));
  const auto features = feature_sets(corpus);
  for (NodeId y : plan.candidates) {
    const auto& set = plan.reservation_set(y);
    REQUIRE(set.size() == 1);
    for (NodeId x : features.at(y)) CHECK(set[0].score >= posterior(m, x, y));
  }
  // phi_{2|1} = 3/6 beats phi_{3|1} = 2/6.
  CHECK(plan.reservation_set(1)[0].node == 2);
}

TEST_CASE("ties rank by ascending id") {
  std::vector<AccessSample> corpus{{1, {3, 2}, 0}, {2, {}, 1}, {3, {}, 2}};
  const auto m = BayesModel::train(corpus, kVocab);
  const auto ranked = rank_features(m, Metric::kPosterior, 1, std::vector<NodeId>{3, 2});
  CHECK(ranked[0].node == 2);
  CHECK(ranked[1].node == 3);
}

TEST_CASE("ranking is invariant to scaling the sample count") {
  std::vector<AccessSample> corpus;
  auto rng = make_rng(5, 0);
  std::uniform_int_distribution<NodeId> node(1, 5);
  for (int i = 0; i < 40; ++i) corpus.push_back({node(rng), {node(rng), node(rng)}, i});
  std::vector<NodeId> vocab{1, 2, 3, 4, 5};
  const auto m = BayesModel::train(corpus, vocab);
  std::vector<std::vector<double>> cond;
  std::vector<double> prior;
  for (NodeId q : vocab) {
    std::vector<double> row;
    for (NodeId p : vocab) row.push_back(m.cond_prob(p, q));
    cond.push_back(row);
    prior.push_back(m.class_prior(q));
  }
  const auto big = BayesModel::from_parameters(vocab, cond, prior, 40.0 * 7.0);
  auto cfg = with_alpha(Metric::kChiSquare, 0.0, 3);
  const auto a = build_plan(m, corpus, Metric::kChiSquare, cfg);
  const auto b = build_plan(big, corpus, Metric::kChiSquare, cfg);
  REQUIRE(a.candidates == b.candidates);
  for (NodeId y : a.candidates) {
    const auto& ra = a.reservation_set(y);
    const auto& rb = b.reservation_set(y);
    REQUIRE(ra.size() == rb.size());
    for (std::size_t i = 0; i < ra.size(); ++i) CHECK(ra[i].node == rb[i].node);
  }
}

TEST_CASE("epoch step is deterministic and grows with a new correlated pair") {
  std::vector<NodeId> vocab{1, 2, 3, 4, 5};
  auto epoch1 = hand_corpus();
  const auto cfg = with_alpha(Metric::kChiSquare, 1.0);
  const auto [m1, p1] = epoch_step(epoch1, vocab, Metric::kChiSquare, cfg);
  const auto [m1b, p1b] = epoch_step(epoch1, vocab, Metric::kChiSquare, cfg);
  CHECK(p1 == p1b);
  CHECK(!p1.is_candidate(4));

  auto epoch2 = epoch1;
  for (int i = 0; i < 10; ++i) epoch2.push_back({4, {5}, 10 + i});
  const auto o = oracle::train(epoch2, vocab);
  REQUIRE(oracle::chi_square(o, 5, 4) > 1.0);
  const auto [m2, p2] = epoch_step(epoch2, vocab, Metric::kChiSquare, cfg);
  CHECK(p2.is_candidate(4));
  CHECK(p2.reservation_set(4).front().node == 5);
  for (NodeId y : p1.candidates) CHECK(p2.is_candidate(y) == p1.is_candidate(y));

  CHECK_THROWS_AS(epoch_step(std::vector<AccessSample>{}, vocab, Metric::kChiSquare, cfg),
                  TrainingError);
}

TEST_CASE("configuration errors") {
  const auto m = BayesModel::train(hand_corpus(), kVocab);
  CHECK_THROWS_AS(build_plan(m, hand_corpus(), Metric::kPosterior,
                             with_alpha(Metric::kChiSquare, 1.0)),
                  ConfigError);
  StaticConfig cfg;
  cfg.xi = 0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  cfg = StaticConfig{};
  cfg.alpha[Metric::kChiSquare] = -1.0;
  CHECK_THROWS_AS(validate(cfg), ConfigError);
  CHECK(StaticConfig{}.alpha_for(Metric::kChiSquare) == 50.0);
}

TEST_CASE("plan CSV lists each candidate's ranked set") {
  StaticPlan plan;
  plan.metric = Metric::kChiSquare;
  plan.alpha = 50;
  plan.xi = 2;
  plan.candidates = {4};
  plan.reservation_sets[4] = {{7, 90.5}, {2, 60}};
  std::ostringstream out;
  write_plan_csv(out, plan);
  CHECK(out.str() ==
        "candidate,rank,node,score,metric,alpha,xi\n"
        "4,1,7,90.5,X,50,2\n"
        "4,2,2,60,X,50,2\n");
  CHECK(plan.score_sum(4) == 150.5);
}

TEST_CASE("threshold error curve counts admits and rejects") {
  std::vector<Node> nodes{{1, {}, SensingType::kTemperature, 0},
                          {2, {}, SensingType::kHumidity, 0},
                          {3, {}, SensingType::kInterference, std::nullopt},
                          {4, {}, SensingType::kInterference, std::nullopt}};
  const std::map<NodeId, double> best{{1, 120}, {2, 80}, {3, 10}, {4, 40}};
  const std::vector<double> alphas{5, 30, 60, 100, 200};
  const auto curve = threshold_error_curve(best, nodes, alphas);
  REQUIRE(curve.size() == 5);
  CHECK(curve[0].interference_admit_rate == 1.0);
  CHECK(curve[0].correlated_reject_rate == 0.0);
  CHECK(curve[1].interference_admit_rate == 0.5);
  CHECK(curve[2].interference_admit_rate == 0.0);
  CHECK(curve[2].correlated_reject_rate == 0.0);
  CHECK(curve[3].correlated_reject_rate == 0.5);
  CHECK(curve[4].correlated_reject_rate == 1.0);
}

}  // TEST_SUITE
