#include <doctest.h>

#include <cmath>
#include <numeric>

#include "dpre/dynamic_stage.h"
#include "dpre/errors.h"

using namespace dpre;

namespace {

const SensingType kTyped[] = {SensingType::kTemperature, SensingType::kHumidity,
                              SensingType::kPressure, SensingType::kVibration};

double sum(const std::vector<double>& v) { return std::accumulate(v.begin(), v.end(), 0.0); }

// Vocab {1, 2, 3}; label 3's row puts 0.6 on node 1 and 0.2 on node 2.
BayesModel prior_model() {
  return BayesModel::from_parameters({1, 2, 3},
                                     {{0.2, 0.4, 0.4}, {0.5, 0.25, 0.25}, {0.6, 0.2, 0.2}},
                                     {0.3, 0.3, 0.4}, 10);
}

}  // namespace

TEST_SUITE("dynamic_stage") {

TEST_CASE("utility identities for every typed sensor") {
  for (SensingType t : kTyped) {
    const auto q = qos_for(t);
    REQUIRE(q.has_value());
    CHECK(std::abs(utility(*q, 0.0) - 1.0) <= 1e-12);
    CHECK(std::abs(q->c() * (1.0 - q->d()) - 1.0) <= 1e-12);
    CHECK(utility(*q, 50.0 * q->delay_threshold) <= 1e-12);
  }
  CHECK(!qos_for(SensingType::kInterference).has_value());
}

TEST_CASE("per-type QoS tuples") {
  CHECK(qos_for(SensingType::kTemperature)->delay_threshold == 8.0);
  CHECK(qos_for(SensingType::kTemperature)->criticality == 0.8);
  CHECK(qos_for(SensingType::kHumidity)->delay_threshold == 12.0);
  CHECK(qos_for(SensingType::kPressure)->delay_threshold == 16.0);
  CHECK(qos_for(SensingType::kVibration)->delay_threshold == 10.0);
}

TEST_CASE("utility at the threshold") {
  // At l = b the sigmoid is 1/2, which leaves U = (1 + e^{-ab}) / 2.
  const auto q = *qos_for(SensingType::kTemperature);
  CHECK(utility(q, 8.0) == doctest::Approx(0.5 + 0.5 * std::exp(-6.4)).epsilon(1e-12));
  CHECK(utility(q, 8.0) == doctest::Approx(0.50083).epsilon(1e-5));
}

TEST_CASE("utility decreases strictly with its inflection at the threshold") {
  for (SensingType t : kTyped) {
    const auto q = *qos_for(t);
    const double b = q.delay_threshold;
    for (double l = 0.0; l < 5.0 * b; l += 0.1) {
      REQUIRE(utility(q, l + 0.1) < utility(q, l));
    }
    const double h = 0.05;
    auto second = [&](double l) { return utility(q, l + h) - 2 * utility(q, l) + utility(q, l - h); };
    CHECK(second(b - 1.0) < 0.0);
    CHECK(second(b + 1.0) > 0.0);
  }
}

TEST_CASE("reserved RBs split by score weight") {
  std::vector<Share> shares{{1, 3.0, 8}, {2, 1.0, 8}};
  CHECK(allocate_shares(shares, 8) == std::map<NodeId, int>{{1, 6}, {2, 2}});

  std::vector<Share> one{{5, 2.5, 8}};
  CHECK(allocate_shares(one, 6) == std::map<NodeId, int>{{5, 6}});

  std::vector<Share> tie{{3, 1.0, 8}, {1, 1.0, 8}, {2, 1.0, 8}};
  CHECK(allocate_shares(tie, 4) == std::map<NodeId, int>{{1, 2}, {2, 1}, {3, 1}});

  std::vector<Share> capped{{1, 1.0, 2}};
  CHECK(allocate_shares(capped, 6) == std::map<NodeId, int>{{1, 2}});

  std::vector<Share> zero{{1, 0.0, 8}, {2, 0.0, 8}};
  CHECK(allocate_shares(zero, 4) == std::map<NodeId, int>{{1, 2}, {2, 2}});

  CHECK(allocate_shares(std::vector<Share>{}, 4).empty());
}

TEST_CASE("split never exceeds the budget or a cap") {
  auto rng = make_rng(17, 0);
  std::uniform_real_distribution<double> w(0.0, 100.0);
  std::uniform_int_distribution<int> cap(0, 8), count(1, 6), budget(0, 50);
  for (int round = 0; round < 2000; ++round) {
    std::vector<Share> shares;
    const int n = count(rng);
    for (int i = 0; i < n; ++i) shares.push_back({i + 1, w(rng), cap(rng)});
    const int n_res = budget(rng);
    const auto out = allocate_shares(shares, n_res);
    int total = 0;
    for (const auto& s : shares) {
      const int d = out.at(s.candidate);
      CHECK(d >= 0);
      CHECK(d <= s.cap);
      total += d;
    }
    CHECK(total <= n_res);
  }
}

TEST_CASE("plan-driven split uses score sums and set sizes") {
  StaticPlan plan;
  plan.candidates = {1, 2};
  plan.reservation_sets[1] = {{3, 2.0}, {4, 1.0}};
  plan.reservation_sets[2] = {{5, 1.0}};
  const std::vector<NodeId> theta{1, 2};
  CHECK(allocate_reserved(theta, plan, 8) == std::map<NodeId, int>{{1, 2}, {2, 1}});
  CHECK(allocate_reserved(theta, plan, 3) == std::map<NodeId, int>{{1, 2}, {2, 1}});
}

TEST_CASE("arms enumerate subsets lexicographically") {
  const std::vector<NodeId> pool{9, 3, 5};
  const auto arms = enumerate_arms(pool, 2);
  CHECK(arms == std::vector<Arm>{{3, 5}, {3, 9}, {5, 9}});
  std::vector<NodeId> eight{1, 2, 3, 4, 5, 6, 7, 8};
  CHECK(enumerate_arms(eight, 4).size() == 70);
  CHECK(enumerate_arms(eight, 0).empty());
  CHECK(enumerate_arms(eight, 9).empty());
}

TEST_CASE("arm prior normalizes member likelihoods") {
  const auto m = prior_model();
  const std::vector<Arm> singles{{1}, {2}};
  const auto p = arm_prior(m, 3, singles);
  CHECK(p[0] == doctest::Approx(0.75).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.25).epsilon(1e-12));

  // Label 1's row is uniform over nodes 2 and 3.
  const std::vector<Arm> even{{2}, {3}};
  const auto u = arm_prior(m, 1, even);
  CHECK(u[0] == doctest::Approx(0.5).epsilon(1e-12));

  const std::vector<Arm> pairs{{1, 2}, {1, 3}, {2, 3}};
  const auto q = arm_prior(m, 3, pairs);
  CHECK(std::abs(sum(q) - 1.0) <= 1e-12);
  CHECK(q[0] == doctest::Approx(0.12 / (0.12 + 0.12 + 0.04)).epsilon(1e-12));

  const std::vector<Arm> stray{{7}};
  CHECK_THROWS_AS(arm_prior(m, 3, stray), LookupError);
}

TEST_CASE("selection probabilities mix weights and prior") {
  const std::vector<double> w{3.0, 1.0}, half{0.5, 0.5}, skew{0.9, 0.1};
  const auto p = mixed_probabilities(w, half, 0.3);
  CHECK(p[0] == doctest::Approx(0.675).epsilon(1e-12));
  CHECK(p[1] == doctest::Approx(0.325).epsilon(1e-12));
  CHECK(mixed_probabilities(w, skew, 1.0) == skew);

  ArmTable fresh({1, 2, 3}, enumerate_arms(std::vector<NodeId>{1, 2, 3}, 1), uniform_prior(3));
  for (double v : fresh.drp_probabilities(0.4)) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));
  for (double v : fresh.exp3_probabilities(0.4)) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-12));
}

TEST_CASE("selection probabilities form a distribution in random states") {
  auto rng = make_rng(23, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_int_distribution<int> k(1, 70);
  for (int s = 0; s < 10000; ++s) {
    const int n = k(rng);
    std::vector<double> w(n), prior(n);
    for (int i = 0; i < n; ++i) {
      w[i] = std::exp(20.0 * unit(rng) - 10.0);
      prior[i] = unit(rng) + 1e-9;
    }
    const double ps = sum(prior);
    for (double& v : prior) v /= ps;
    const double gamma = std::max(1e-6, unit(rng));
    const auto p = mixed_probabilities(w, prior, gamma);
    REQUIRE(std::abs(sum(p) - 1.0) <= 1e-12);
    for (double v : p) REQUIRE(v >= 0.0);
  }
}

TEST_CASE("uniform exploration bounds the importance weight") {
  auto rng = make_rng(29, 0);
  const std::vector<NodeId> pool{1, 2, 3, 4};
  ArmTable t(pool, enumerate_arms(pool, 2), uniform_prior(6));
  const double gamma = 0.2;
  for (int s = 0; s < 500; ++s) {
    const auto sel = exp3_select(t, gamma, rng);
    for (double p : sel.probs) REQUIRE(1.0 / p <= 6.0 / gamma + 1e-9);
    t.exp3_update(sel.probs, sel.arm, sel.arm == 0 ? 1.0 : 0.0, gamma);
  }
}

TEST_CASE("rewards") {
  const Arm chosen{4, 7};
  const auto all_hit = make_feedback(chosen, {{4, 1.0}, {7, 1.0}});
  CHECK(drp_reward(chosen, all_hit, 2, 0.1) == 1.0);
  const auto all_miss = make_feedback(chosen, {});
  CHECK(all_miss.failures == std::set<NodeId>{4, 7});
  CHECK(drp_reward(chosen, all_miss, 2, 0.1) == 0.0);
  const auto half = make_feedback(chosen, {{4, 0.8}});
  CHECK(drp_reward(chosen, half, 2, 0.1) == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("estimates for unplayed arms use only observed outcomes") {
  const Arm chosen{4, 7};
  // Node 9 was served through another candidate's reservation.
  const auto fb = make_feedback(chosen, {{4, 0.8}, {9, 0.6}});
  const double r = drp_reward(chosen, fb, 2, 0.1);
  CHECK(drp_estimate_others(Arm{1, 2}, fb, 2, 0.1, r) == 0.0);
  CHECK(drp_estimate_others(Arm{7, 4}, fb, 2, 0.1, r) == doctest::Approx(r).epsilon(1e-12));
  CHECK(drp_estimate_others(Arm{2, 7}, fb, 2, 0.1, r) == 0.0);
  CHECK(drp_estimate_others(Arm{4, 9}, fb, 2, 0.1, r) == doctest::Approx(r).epsilon(1e-12));
  CHECK(drp_estimate_others(Arm{1, 9}, fb, 2, 0.1, r) == doctest::Approx(0.3).epsilon(1e-12));

  auto rng = make_rng(31, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const std::vector<NodeId> pool{1, 2, 3, 4, 5};
  const auto arms = enumerate_arms(pool, 2);
  for (int s = 0; s < 2000; ++s) {
    const Arm& pick = arms[s % arms.size()];
    std::map<NodeId, double> served;
    for (NodeId x : pool) {
      if (unit(rng) < 0.5) served[x] = unit(rng);
    }
    const auto f = make_feedback(pick, served);
    const double rc = drp_reward(pick, f, 2, 0.1);
    for (const Arm& a : arms) REQUIRE(drp_estimate_others(a, f, 2, 0.1, rc) <= rc);
  }
}

TEST_CASE("DRP update") {
  const std::vector<NodeId> pool{1, 2};
  ArmTable t(pool, enumerate_arms(pool, 1), uniform_prior(2));
  const std::vector<double> probs{0.5, 0.5};
  t.drp_update(probs, 0, std::vector<double>{0.0, 0.0}, 0.5);
  CHECK(t.weights() == std::vector<double>{1.0, 1.0});
  t.drp_update(probs, 0, std::vector<double>{1.0, 0.0}, 0.5);
  const auto w = t.weights();
  CHECK(w[0] / w[1] == doctest::Approx(std::exp(0.5)).epsilon(1e-12));
  CHECK(t.trials() == 2);

  // Unchosen arms are divided by max(P, 1 - P).
  ArmTable u(pool, enumerate_arms(pool, 1), uniform_prior(2));
  const std::vector<double> p2{0.8, 0.2};
  u.drp_update(p2, 0, std::vector<double>{0.4, 0.4}, 0.5);
  const auto v = u.weights();
  const double chosen = std::exp(0.5 * (0.4 / 0.8) / 2);
  const double other = std::exp(0.5 * (0.4 / 0.8) / 2);
  CHECK(v[0] / v[1] == doctest::Approx(chosen / other).epsilon(1e-12));
}

TEST_CASE("EXP3 follows a hand-rolled three-trial trace") {
  const std::vector<NodeId> pool{1, 2};
  ArmTable t(pool, enumerate_arms(pool, 1), uniform_prior(2));
  const double g = 0.2;
  const std::size_t chosen[3] = {0, 1, 0};
  const double reward[3] = {1.0, 0.5, 0.2};
  double w0 = 1.0, w1 = 1.0;
  for (int s = 0; s < 3; ++s) {
    const double p0 = (1 - g) * w0 / (w0 + w1) + g / 2;
    const double p1 = (1 - g) * w1 / (w0 + w1) + g / 2;
    const auto probs = t.exp3_probabilities(g);
    CHECK(probs[0] == doctest::Approx(p0).epsilon(1e-12));
    CHECK(probs[1] == doctest::Approx(p1).epsilon(1e-12));
    if (chosen[s] == 0) {
      w0 *= std::exp(g * reward[s] / p0 / 2);
    } else {
      w1 *= std::exp(g * reward[s] / p1 / 2);
    }
    t.exp3_update(probs, chosen[s], reward[s], g);
    const auto w = t.weights();
    CHECK(w[0] / w[1] == doctest::Approx(w0 / w1).epsilon(1e-12));
  }
}

TEST_CASE("seeded selection is reproducible") {
  const std::vector<NodeId> pool{1, 2, 3, 4};
  auto trajectory = [&]() {
    ArmTable t(pool, enumerate_arms(pool, 2), uniform_prior(6));
    auto rng = make_rng(37, 4);
    std::vector<std::size_t> picks;
    for (int s = 0; s < 50; ++s) {
      const auto sel = drp_select(t, 0.3, rng);
      picks.push_back(sel.arm);
      std::vector<double> r(6, 0.0);
      r[sel.arm] = sel.arm % 2 ? 0.9 : 0.1;
      t.drp_update(sel.probs, sel.arm, r, 0.3);
    }
    return picks;
  };
  CHECK(trajectory() == trajectory());
}

TEST_CASE("rescaling weights leaves probabilities unchanged") {
  const std::vector<NodeId> pool{1, 2, 3};
  ArmTable t(pool, enumerate_arms(pool, 1), std::vector<double>{0.5, 0.3, 0.2});
  t.drp_update(std::vector<double>{0.3, 0.3, 0.4}, 1, std::vector<double>{0.1, 0.9, 0.0}, 0.4);
  const auto before = t.drp_probabilities(0.4);
  for (double f : {1e-100, 0.37, 5.0, 1e100}) {
    t.scale_weights(f);
    const auto after = t.drp_probabilities(0.4);
    for (std::size_t i = 0; i < before.size(); ++i) {
      CHECK(after[i] == doctest::Approx(before[i]).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(t.scale_weights(0.0), ConfigError);
}

TEST_CASE("weights stay positive and finite over long runs") {
  const std::vector<NodeId> pool{1, 2, 3, 4};
  const auto arms = enumerate_arms(pool, 2);
  ArmTable t(pool, arms, uniform_prior(arms.size()));
  auto rng = make_rng(41, 0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double g = 0.3;
  for (int s = 0; s < 20000; ++s) {
    const auto sel = drp_select(t, g, rng);
    std::map<NodeId, double> served;
    for (NodeId x : pool) {
      if (unit(rng) < 0.5) served[x] = unit(rng);
    }
    const auto fb = make_feedback(arms[sel.arm], served);
    const double r = drp_reward(arms[sel.arm], fb, 2, 0.1);
    std::vector<double> rewards(arms.size());
    for (std::size_t k = 0; k < arms.size(); ++k) {
      rewards[k] = k == sel.arm ? r : drp_estimate_others(arms[k], fb, 2, 0.1, r);
    }
    t.drp_update(sel.probs, sel.arm, rewards, g);
  }
  for (double w : t.weights()) {
    CHECK(std::isfinite(w));
    CHECK(w > 0.0);
  }

  // A single dominant arm drives the others' relative weight far below the
  // double range; probabilities still keep the exploration floor.
  ArmTable d(pool, enumerate_arms(pool, 1), uniform_prior(4));
  for (int s = 0; s < 20000; ++s) {
    d.drp_update(d.drp_probabilities(0.9), 0, std::vector<double>{1.0, 0.0, 0.0, 0.0}, 0.9);
  }
  for (double w : d.weights()) CHECK(std::isfinite(w));
  const auto p = d.drp_probabilities(0.9);
  CHECK(std::abs(sum(p) - 1.0) <= 1e-12);
  for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i] >= 0.9 * 0.25 - 1e-12);
}

TEST_CASE("DRP state keys tables by candidate and size") {
  CHECK_THROWS_AS(DrpState(0.0, 0.1), ConfigError);
  CHECK_THROWS_AS(DrpState(1.5, 0.1), ConfigError);
  CHECK_THROWS_AS(DrpState(0.5, -1.0), ConfigError);
  DrpState state(0.3, 0.1);
  const auto m = prior_model();
  const std::vector<NodeId> pool{2, 1};
  ArmTable& a = state.table(3, pool, 1, &m);
  CHECK(a.pool() == std::vector<NodeId>{1, 2});
  CHECK(a.prior()[0] == doctest::Approx(0.75).epsilon(1e-12));
  a.drp_update(a.drp_probabilities(0.3), 0, std::vector<double>{1.0, 0.0}, 0.3);
  CHECK(&state.table(3, pool, 1, &m) == &a);
  CHECK(state.table(3, pool, 1, &m).trials() == 1);
  state.table(3, pool, 2, nullptr);
  CHECK(state.table_count() == 2);
  const std::vector<NodeId> other{1, 3};
  CHECK(state.table(3, other, 1, nullptr).trials() == 0);
  CHECK(state.table_count() == 2);
}

}  // TEST_SUITE
