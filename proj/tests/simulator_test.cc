#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>
#include <sstream>

#include "dpre/errors.h"
#include "dpre/simulator.h"

using namespace dpre;

namespace {

std::vector<Node> line_of(int n) {
  std::vector<Node> nodes;
  for (int i = 1; i <= n; ++i) nodes.push_back({i, {static_cast<double>(i), 0.0},
                                                SensingType::kTemperature, 0});
  return nodes;
}

std::shared_ptr<const BayesModel> uniform_model(int n) {
  std::vector<NodeId> vocab;
  for (int i = 1; i <= n; ++i) vocab.push_back(i);
  std::vector<std::vector<double>> cond(n, std::vector<double>(n, 1.0 / n));
  return std::make_shared<const BayesModel>(
      BayesModel::from_parameters(vocab, cond, std::vector<double>(n, 1.0 / n), 100));
}

void run_to_end(Simulator& sim) {
  int guard = 0;
  while (!sim.done() && guard++ < 1000000) sim.step();
  REQUIRE(sim.done());
}

// Node letters of the two-candidate example: A=1 ... K=11.
enum : NodeId { A = 1, B, C, D, E, F, G, H, I, J, K };

}  // namespace

TEST_SUITE("simulator") {

TEST_CASE("two-candidate walk-through") {
  RunConfig cfg;
  cfg.n_res = 4;
  auto plan = std::make_shared<StaticPlan>();
  plan->candidates = {A, D};
  plan->reservation_sets[A] = {{D, 90}, {E, 80}, {F, 70}};
  plan->reservation_sets[D] = {{H, 90}, {I, 80}, {K, 70}};
  std::vector<ScheduledTrigger> triggers{
      {A, 0, 10}, {G, 0, 10}, {D, 5, 20}, {F, 5, 20}, {H, 6, 20}, {K, 6, 20}};
  Simulator sim(line_of(11), triggers, cfg, 1000, 0);
  sim.set_plan(plan, uniform_model(11));

  std::map<Tti, TtiState> states;
  while (!sim.done()) {
    const TtiState s = sim.step();
    states[s.tti] = s;
  }
  CHECK(states.at(10).theta.empty());
  CHECK(states.at(10).c_set == std::vector<NodeId>{A, G});
  CHECK(states.at(11).theta == std::vector<NodeId>{A});
  CHECK(states.at(11).deltas == std::vector<int>{3});
  CHECK(states.at(11).omega.size() == 3);
  CHECK(states.at(11).s_set == std::vector<NodeId>{D, F});
  CHECK(states.at(12).theta == std::vector<NodeId>{D});
  CHECK(states.at(12).s_set == std::vector<NodeId>{H, K});
  CHECK(states.at(13).theta.empty());

  const auto& log = sim.log();
  REQUIRE(log.reservations.size() == 6);
  std::set<NodeId> hit, wasted;
  for (const auto& r : log.reservations) {
    (r.hit ? hit : wasted).insert(r.node);
    if (r.hit) CHECK(r.latency == 7);
  }
  CHECK(hit == std::set<NodeId>{D, F, H, K});
  CHECK(wasted == std::set<NodeId>{E, I});
  CHECK(log.max_omega == 3);
  CHECK(log.accesses.size() == 6);
  for (const auto& a : log.accesses) {
    const bool conventional = a.node_id == A || a.node_id == G;
    CHECK((a.path == AccessPath::kConventional) == conventional);
    CHECK(a.latency == (conventional ? 10 : 7));
  }
  REQUIRE(log.decisions.size() == 2);
  const double u7 = utility(*qos_for(SensingType::kTemperature), 7.0);
  for (const auto& d : log.decisions) {
    CHECK(d.hits == 2);
    CHECK(d.misses == 1);
    CHECK(d.reward == doctest::Approx((2 * u7 - 0.1) / 3).epsilon(1e-12));
  }
  const auto acc = accuracy(log.reservations, 1, false);
  CHECK(acc[0] == doctest::Approx(4.0 / 6.0));
}

TEST_CASE("cold start sends everything conventional") {
  RunConfig cfg;
  auto plan = std::make_shared<StaticPlan>();
  plan->candidates = {A};
  plan->reservation_sets[A] = {{B, 1}};
  std::vector<ScheduledTrigger> triggers{{B, 0, 12}, {C, 0, 11}};
  Simulator sim(line_of(3), triggers, cfg, 1000, 0);
  sim.set_plan(plan, uniform_model(3));
  const auto first = sim.step();
  CHECK(first.theta.empty());
  CHECK(first.omega.empty());
  run_to_end(sim);
  CHECK(sim.log().reservations.empty());
  for (const auto& a : sim.log().accesses) CHECK(a.path == AccessPath::kConventional);
}

TEST_CASE("a candidate whose whole set fires with it reaches full accuracy") {
  // y = 1 accesses at 50k + 10; its set {2, 3, 4} triggers one TTI earlier
  // with a slow SR path, so every reservation is used.
  RunConfig cfg;
  cfg.n_res = 6;
  auto plan = std::make_shared<StaticPlan>();
  plan->candidates = {1};
  plan->reservation_sets[1] = {{2, 3}, {3, 2}, {4, 1}};
  std::vector<ScheduledTrigger> triggers;
  const int periods = 40;
  for (int k = 0; k < periods; ++k) {
    triggers.push_back({1, 50 * k, 10});
    for (NodeId x : {2, 3, 4}) triggers.push_back({x, 50 * k + 9, 20});
  }
  Simulator sim(line_of(4), triggers, cfg, 50, 0);
  sim.set_plan(plan, uniform_model(4));
  run_to_end(sim);
  const auto acc = accuracy(sim.log().reservations, periods, false);
  for (int s = 0; s < periods; ++s) CHECK(acc[s] == 1.0);
  CHECK(sim.log().reservations.size() == 3u * periods);
}

TEST_CASE("hand-scripted accuracy trace") {
  std::vector<ReservationEntry> log{
      {1, 1, 9, 2, true, 2, 8.0},  {2, 1, 9, 3, true, 3, 8.0},   {3, 1, 9, 4, true, 12, 8.0},
      {4, 1, 9, 5, false, 0, 8.0}, {9, 1, 9, 6, false, 0, 12.0},
  };
  CHECK(accuracy(log, 2, false) == std::vector<double>{0.6, 0.0});
  CHECK(accuracy(log, 2, true) == std::vector<double>{0.4, 0.0});
  std::vector<ReservationEntry> all_hit{{0, 1, 9, 2, true, 1, 8.0}, {0, 1, 9, 3, true, 2, 8.0}};
  CHECK(accuracy(all_hit, 1, true) == std::vector<double>{1.0});
  std::vector<ReservationEntry> wasted{{0, 1, 9, 2, false, 0, 8.0}};
  CHECK(accuracy(wasted, 1, false) == std::vector<double>{0.0});
}

TEST_CASE("retriggering before delivery is a data error") {
  RunConfig cfg;
  std::vector<ScheduledTrigger> triggers{{1, 0, 10}, {1, 5, 10}};
  Simulator sim(line_of(2), triggers, cfg, 100, 0);
  CHECK_THROWS_AS([&] { for (int i = 0; i < 10; ++i) sim.step(); }(), DataError);
  std::vector<ScheduledTrigger> unknown{{9, 0, 10}};
  CHECK_THROWS_AS(Simulator(line_of(2), unknown, cfg, 100, 0), DataError);
}

TEST_CASE("nearest nodes break distance ties by id") {
  std::vector<Node> nodes{{1, {0, 0}, SensingType::kTemperature, 0},
                          {2, {1, 0}, SensingType::kTemperature, 0},
                          {3, {-1, 0}, SensingType::kTemperature, 0},
                          {4, {0, 2}, SensingType::kTemperature, 0}};
  CHECK(nearest_nodes(nodes, 1, 1) == std::vector<NodeId>{2});
  CHECK(nearest_nodes(nodes, 1, 2) == std::vector<NodeId>{2, 3});
  CHECK(nearest_nodes(nodes, 1, 10) == std::vector<NodeId>{2, 3, 4});
}

TEST_CASE("conservation holds every TTI for every algorithm") {
  for (Algorithm algo : {Algorithm::kDPre, Algorithm::kDPreNoQos, Algorithm::kExp3,
                         Algorithm::kStatic, Algorithm::kAPre, Algorithm::kAPreD}) {
    CAPTURE(to_string(algo));
    RunConfig cfg;
    cfg.algo = algo;
    cfg.n_res = 5;
    cfg.seed = 3;
    TrafficConfig traffic = cfg.traffic;
    traffic.seed = cfg.seed;
    const auto nodes = build_topology(traffic);
    const int boot = 100, live = 20;
    const auto trace = generate_triggers(nodes, traffic, boot + live);
    auto rng = make_rng(cfg.seed, 3);
    std::vector<ScheduledTrigger> sched;
    std::map<std::pair<NodeId, Tti>, Tti> delay;
    for (const auto& e : trace.events) {
      const Tti d = conventional_access_delay(rng, traffic.conventional_delay_range);
      sched.push_back({e.node_id, e.trigger_tti, d});
      delay[{e.node_id, e.trigger_tti}] = d;
    }
    const Tti period = traffic.plate_period();
    Simulator sim(nodes, sched, cfg, period, boot);
    sim.set_reservations_enabled(false);
    while (sim.now() < boot * period) sim.step();
    const auto samples = extract_samples(sim.log().accesses, nodes, cfg.sample_cfg);
    std::vector<NodeId> vocab;
    for (const auto& n : nodes) vocab.push_back(n.id);
    auto [model, plan] = epoch_step(samples, vocab, cfg.metric, cfg.static_cfg);
    REQUIRE(!plan.candidates.empty());
    sim.set_plan(std::make_shared<const StaticPlan>(plan),
                 std::make_shared<const BayesModel>(model));
    sim.set_reservations_enabled(true);

    std::size_t accesses = sim.log().accesses.size();
    while (!sim.done()) {
      const TtiState s = sim.step();
      REQUIRE(s.omega.size() <= static_cast<std::size_t>(cfg.n_res));
      int delta_sum = 0;
      for (int d : s.deltas) delta_sum += d;
      REQUIRE(delta_sum <= cfg.n_res);
      std::set<NodeId> omega;
      for (const auto& [x, owner] : s.omega) REQUIRE(omega.insert(x).second);
      const std::size_t grown = sim.log().accesses.size() - accesses;
      REQUIRE(grown == s.s_set.size() + s.c_set.size());
      accesses = sim.log().accesses.size();
    }
    const auto& log = sim.log();
    CHECK(log.accesses.size() == sched.size());
    std::set<std::pair<NodeId, Tti>> served;
    std::size_t pre = 0;
    for (const auto& a : log.accesses) {
      REQUIRE(served.insert({a.node_id, a.trigger_tti}).second);
      const Tti d = delay.at({a.node_id, a.trigger_tti});
      if (a.path == AccessPath::kPreAllocated) {
        ++pre;
        CHECK(a.latency >= 1);
        CHECK(a.latency < d);
      } else {
        CHECK(a.latency == d);
      }
      CHECK(a.access_tti - a.trigger_tti + (a.path == AccessPath::kPreAllocated ? 1 : 0) ==
            a.latency);
    }
    std::size_t hits = 0;
    for (const auto& r : log.reservations) hits += r.hit;
    CHECK(hits == pre);
    CHECK(log.max_omega <= static_cast<std::size_t>(cfg.n_res));
    CHECK(log.max_delta_sum <= cfg.n_res);
  }
}

TEST_CASE("runs are byte-identical per seed") {
  RunConfig cfg;
  cfg.n_trials = 20;
  cfg.bootstrap_trials = 30;
  auto dump = [](const RunConfig& c) {
    const auto report = run(c);
    std::ostringstream o;
    write_trial_csv(o, report);
    write_tti_csv(o, report);
    return o.str();
  };
  const auto a = dump(cfg);
  CHECK(a == dump(cfg));
  cfg.seed = 2;
  CHECK(a != dump(cfg));
}

TEST_CASE("run reports serve every trigger") {
  RunConfig cfg;
  cfg.n_trials = 20;
  const auto report = run(cfg);
  CHECK(report.log.accesses.size() == report.trigger_count);
  CHECK(report.trials.size() == 20);
  CHECK(report.epochs_trained == 1);
  CHECK(!report.first_plan.candidates.empty());
  CHECK(report.log.max_omega <= static_cast<std::size_t>(cfg.n_res));
}

TEST_CASE("no reserved RBs means conventional access and zero accuracy") {
  RunConfig cfg;
  cfg.n_res = 0;
  cfg.n_trials = 10;
  cfg.bootstrap_trials = 20;
  const auto report = run(cfg);
  CHECK(report.log.reservations.empty());
  for (const auto& a : report.log.accesses) CHECK(a.path == AccessPath::kConventional);
  for (const auto& t : report.trials) CHECK(t.accuracy == 0.0);
}

TEST_CASE("config hash ignores the seed only") {
  RunConfig a, b;
  b.seed = 99;
  CHECK(config_hash(a) == config_hash(b));
  b.gamma = 0.6;
  CHECK(config_hash(a) != config_hash(b));
  CHECK(fnv1a_hex("") == "cbf29ce484222325");
  CHECK(fnv1a_hex("a") == "af63dc4c8601ec8c");
}

TEST_CASE("per-trial and per-TTI CSV schemas") {
  RunConfig cfg;
  cfg.n_trials = 5;
  cfg.bootstrap_trials = 20;
  const auto report = run(cfg);
  std::ostringstream trial, tti;
  write_trial_csv(trial, report);
  write_tti_csv(tti, report);
  std::istringstream t(trial.str()), u(tti.str());
  std::string l1, l2;
  std::getline(t, l1);
  std::getline(t, l2);
  CHECK(l1 == "# config_hash=" + config_hash(cfg));
  CHECK(l2 == "trial,algo,metric,gamma,accuracy,qos_accuracy,mean_latency,mean_utility");
  std::getline(u, l1);
  std::getline(u, l2);
  CHECK(l2 == "tti,candidate,arm_members,hits,misses,reward");
}

TEST_CASE("algorithm names round-trip") {
  for (auto a : {Algorithm::kDPre, Algorithm::kDPreNoQos, Algorithm::kExp3, Algorithm::kStatic,
                 Algorithm::kAPre, Algorithm::kAPreD}) {
    CHECK(parse_algorithm(to_string(a)) == a);
  }
  CHECK_THROWS_AS(parse_algorithm("greedy"), ConfigError);
}

}  // TEST_SUITE
