#include "dpre/simulator.h"

#include <algorithm>
#include <cstdio>
#include <numeric>
#include <ostream>
#include <sstream>

#include "dpre/csv.h"
#include "dpre/errors.h"

namespace dpre {
namespace {

constexpr std::uint64_t kDelayStream = 3;
constexpr std::uint64_t kSelectionStream = 4;

bool uses_static_stage(Algorithm a) {
  return a == Algorithm::kDPre || a == Algorithm::kDPreNoQos || a == Algorithm::kExp3 ||
         a == Algorithm::kStatic;
}

std::string join_ids(const std::vector<NodeId>& ids) {
  std::string s;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) s += ';';
    s += std::to_string(ids[i]);
  }
  return s;
}

}  // namespace

std::string_view to_string(Algorithm algo) {
  switch (algo) {
    case Algorithm::kDPre: return "DPre";
    case Algorithm::kDPreNoQos: return "DPre-wQoS";
    case Algorithm::kExp3: return "EXP3";
    case Algorithm::kStatic: return "Static";
    case Algorithm::kAPre: return "APre";
    case Algorithm::kAPreD: return "APre-D";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view name) {
  for (auto a : {Algorithm::kDPre, Algorithm::kDPreNoQos, Algorithm::kExp3, Algorithm::kStatic,
                 Algorithm::kAPre, Algorithm::kAPreD}) {
    if (to_string(a) == name) return a;
  }
  throw ConfigError("unknown algorithm '" + std::string(name) + "'");
}

void validate(const RunConfig& cfg) {
  if (cfg.n_res < 0) throw ConfigError("n_res must be non-negative");
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) throw ConfigError("gamma must lie in (0, 1]");
  if (!(cfg.beta >= 0.0)) throw ConfigError("beta must be non-negative");
  if (cfg.n_trials < 1) throw ConfigError("n_trials must be positive");
  if (cfg.bootstrap_trials < 0) throw ConfigError("bootstrap_trials must be non-negative");
  if (cfg.reservation_window < 1) throw ConfigError("reservation_window must be at least 1");
  if (cfg.candidate_lookback < 1) throw ConfigError("candidate_lookback must be at least 1");
  if (cfg.recent_access_guard < 0) throw ConfigError("recent_access_guard must be non-negative");
  if (cfg.adjacency_set_size < 1) throw ConfigError("adjacency_set_size must be positive");
  validate(cfg.static_cfg);
  cfg.static_cfg.alpha_for(cfg.metric);
  validate(cfg.sample_cfg);
  validate(cfg.traffic);
}

std::vector<NodeId> nearest_nodes(std::span<const Node> nodes, NodeId y, std::size_t count) {
  const Node& self = node_by_id(nodes, y);
  std::vector<std::pair<double, NodeId>> order;
  order.reserve(nodes.size());
  for (const Node& n : nodes) {
    if (n.id != y) order.emplace_back(distance(self.location, n.location), n.id);
  }
  const std::size_t k = std::min(count, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end());
  std::vector<NodeId> out;
  out.reserve(k);
  for (std::size_t i = 0; i < k; ++i) out.push_back(order[i].second);
  return out;
}

Simulator::Simulator(std::vector<Node> nodes, std::vector<ScheduledTrigger> triggers,
                     RunConfig cfg, Tti trial_period, int trial_offset)
    : nodes_(std::move(nodes)),
      triggers_(std::move(triggers)),
      cfg_(std::move(cfg)),
      trial_period_(trial_period),
      trial_offset_(trial_offset),
      drp_(cfg_.gamma, cfg_.beta),
      rng_(make_rng(cfg_.seed, kSelectionStream)) {
  if (trial_period_ < 1) throw ConfigError("trial period must be positive");
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id != static_cast<NodeId>(i + 1)) {
      throw DataError("simulator needs dense node ids 1..N");
    }
  }
  std::stable_sort(triggers_.begin(), triggers_.end(), [](const auto& a, const auto& b) {
    return a.trigger_tti != b.trigger_tti ? a.trigger_tti < b.trigger_tti : a.node < b.node;
  });
  for (const auto& t : triggers_) {
    node_by_id(nodes_, t.node);
    if (t.conventional_delay < 1) throw DataError("conventional delay must be positive");
  }
  const std::size_t n = nodes_.size();
  pending_.resize(n);
  active_.resize(n);
  last_access_.assign(n, std::numeric_limits<Tti>::min() / 2);
  if (cfg_.algo == Algorithm::kAPre || cfg_.algo == Algorithm::kAPreD) {
    nearest_.resize(n);
    const std::size_t want = cfg_.algo == Algorithm::kAPre
                                 ? n
                                 : static_cast<std::size_t>(cfg_.adjacency_set_size);
    for (const Node& node : nodes_) nearest_[node.id - 1] = nearest_nodes(nodes_, node.id, want);
  }
}

void Simulator::set_plan(std::shared_ptr<const StaticPlan> plan,
                         std::shared_ptr<const BayesModel> model) {
  plan_ = std::move(plan);
  model_ = std::move(model);
}

int Simulator::trial_of(Tti tti) const {
  return static_cast<int>(tti / trial_period_) - trial_offset_ + 1;
}

bool Simulator::done() const {
  return next_trigger_ >= triggers_.size() && served_ >= triggers_.size() &&
         decisions_.empty() && active_list_.empty();
}

std::vector<NodeId> Simulator::collect_candidates() const {
  std::vector<NodeId> theta;
  for (auto it = recent_access_.rbegin(); it != recent_access_.rend(); ++it) {
    if (it->first < now_ - cfg_.candidate_lookback) break;
    const NodeId y = it->second;
    if (uses_static_stage(cfg_.algo) && !(plan_ && plan_->is_candidate(y))) continue;
    theta.push_back(y);
  }
  std::sort(theta.begin(), theta.end());
  theta.erase(std::unique(theta.begin(), theta.end()), theta.end());
  return theta;
}

bool Simulator::taken(NodeId x, const std::vector<char>& in_omega) const {
  const std::size_t i = static_cast<std::size_t>(x - 1);
  return in_omega[i] || active_[i].has_value();
}

bool Simulator::recently_accessed(NodeId x) const {
  return now_ - last_access_[static_cast<std::size_t>(x - 1)] <= cfg_.recent_access_guard;
}

void Simulator::place(NodeId owner, NodeId x, std::vector<char>& in_omega) {
  const std::size_t i = static_cast<std::size_t>(x - 1);
  in_omega[i] = 1;
  ReservationEntry e;
  e.tti = now_;
  e.trial = trial_of(now_);
  e.candidate = owner;
  e.node = x;
  if (auto q = qos_for(nodes_[i].type)) e.deadline = q->delay_threshold;
  active_[i] = log_.reservations.size();
  active_list_.push_back(log_.reservations.size());
  log_.reservations.push_back(e);
  state_.omega.emplace_back(x, owner);
}

void Simulator::select_learning(NodeId y, int delta, std::span<const NodeId> pool,
                                const BayesModel* prior_model, std::vector<char>& in_omega) {
  ArmTable& table = drp_.table(y, pool, delta, prior_model);
  const bool exp3 = cfg_.algo == Algorithm::kExp3;
  std::vector<double> probs =
      exp3 ? table.exp3_probabilities(cfg_.gamma) : table.drp_probabilities(cfg_.gamma);

  // Redraw among arms that avoid nodes another reservation already holds.
  std::vector<double> restricted(probs.size(), 0.0);
  double mass = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const Arm& arm = table.arms()[k];
    if (std::none_of(arm.begin(), arm.end(), [&](NodeId x) { return taken(x, in_omega); })) {
      restricted[k] = probs[k];
      mass += probs[k];
    }
  }
  if (mass > 0.0) {
    for (double& p : restricted) p /= mass;
    probs = std::move(restricted);
  }
  const std::size_t chosen = sample_index(probs, rng_);

  Decision d;
  d.candidate = y;
  d.delta = delta;
  d.pool = table.pool();
  d.learns = true;
  d.arm = chosen;
  d.members = table.arms()[chosen];
  d.probs = std::move(probs);
  d.issue = now_;
  d.resolve = now_ + cfg_.reservation_window - 1;
  for (NodeId x : d.members) {
    if (!taken(x, in_omega) && !recently_accessed(x)) place(y, x, in_omega);
  }
  d.log_index = log_.decisions.size();
  log_.decisions.push_back({now_, trial_of(now_), y, d.members, 0, 0, 0.0});
  decisions_.push_back(std::move(d));
}

double Simulator::reward_utility(const Node& node, Tti latency) const {
  if (cfg_.algo == Algorithm::kDPreNoQos) return 1.0;
  auto q = qos_for(node.type);
  return q ? utility(*q, static_cast<double>(latency)) : 1.0;
}

void Simulator::serve(NodeId x, AccessPath path, Tti latency) {
  const std::size_t i = static_cast<std::size_t>(x - 1);
  const Pending p = *pending_[i];
  pending_[i].reset();
  ++served_;
  log_.accesses.push_back({x, now_, path, latency, p.trigger_tti});
  last_access_[i] = now_;
  recent_access_.emplace_back(now_, x);
  if (path == AccessPath::kPreAllocated) {
    state_.s_set.push_back(x);
    recent_pre_.push_back({now_, x, reward_utility(nodes_[i], latency)});
  } else {
    state_.c_set.push_back(x);
  }
}

void Simulator::resolve(const Decision& d) {
  std::map<NodeId, double> served;
  for (const auto& a : recent_pre_) {
    if (a.tti >= d.issue && a.tti <= d.resolve) served.emplace(a.node, a.utility);
  }
  const ArmFeedback fb = make_feedback(d.members, served);
  const double r = drp_reward(d.members, fb, d.delta, cfg_.beta);
  DecisionEntry& entry = log_.decisions[d.log_index];
  for (NodeId x : d.members) served.count(x) ? ++entry.hits : ++entry.misses;
  entry.reward = r;
  if (!d.learns) return;

  const bool exp3 = cfg_.algo == Algorithm::kExp3;
  const BayesModel* prior_model =
      (cfg_.algo == Algorithm::kAPreD || exp3) ? nullptr : model_.get();
  ArmTable& table = drp_.table(d.candidate, d.pool, d.delta, prior_model);
  if (table.pool() != d.pool) return;  // table rebuilt after a retrain
  if (exp3) {
    table.exp3_update(d.probs, d.arm, r, cfg_.gamma);
    return;
  }
  std::vector<double> rewards(table.size());
  for (std::size_t k = 0; k < table.size(); ++k) {
    rewards[k] = k == d.arm ? r : drp_estimate_others(table.arms()[k], fb, d.delta, cfg_.beta, r);
  }
  table.drp_update(d.probs, d.arm, rewards, cfg_.gamma);
}

const TtiState& Simulator::step() {
  state_ = TtiState{};
  state_.tti = now_;

  // Triggers of this TTI become pending.
  while (next_trigger_ < triggers_.size() && triggers_[next_trigger_].trigger_tti <= now_) {
    const auto& t = triggers_[next_trigger_++];
    auto& slot = pending_[static_cast<std::size_t>(t.node - 1)];
    if (slot) throw DataError("node " + std::to_string(t.node) + " triggered before delivery");
    slot = Pending{t.trigger_tti, t.conventional_delay};
  }

  while (!recent_access_.empty() &&
         recent_access_.front().first <
             now_ - std::max(cfg_.candidate_lookback, cfg_.recent_access_guard)) {
    recent_access_.pop_front();
  }

  // Reservation decisions for Θ_t.
  std::vector<char> in_omega(nodes_.size(), 0);
  if (enabled_ && cfg_.n_res > 0) {
    state_.theta = collect_candidates();
    const auto& theta = state_.theta;
    std::map<NodeId, int> deltas;
    if (uses_static_stage(cfg_.algo)) {
      if (!theta.empty()) deltas = allocate_reserved(theta, *plan_, cfg_.n_res);
    } else {
      std::vector<Share> shares;
      for (NodeId y : theta) {
        const int cap = static_cast<int>(nearest_[y - 1].size());
        shares.push_back({y, 0.0, cfg_.algo == Algorithm::kAPreD
                                      ? std::min(cap, cfg_.adjacency_set_size)
                                      : cap});
      }
      deltas = allocate_shares(shares, cfg_.n_res);
    }
    int delta_sum = 0;
    for (NodeId y : theta) {
      const int delta = deltas[y];
      state_.deltas.push_back(delta);
      delta_sum += delta;
      if (delta <= 0) continue;
      switch (cfg_.algo) {
        case Algorithm::kDPre:
        case Algorithm::kDPreNoQos:
        case Algorithm::kExp3: {
          std::vector<NodeId> pool;
          for (const auto& s : plan_->reservation_set(y)) pool.push_back(s.node);
          select_learning(y, delta, pool,
                          cfg_.algo == Algorithm::kExp3 ? nullptr : model_.get(), in_omega);
          break;
        }
        case Algorithm::kAPreD:
          select_learning(y, delta, nearest_[y - 1], nullptr, in_omega);
          break;
        case Algorithm::kStatic:
        case Algorithm::kAPre: {
          std::vector<NodeId> ranked;
          if (cfg_.algo == Algorithm::kStatic) {
            for (const auto& s : plan_->reservation_set(y)) ranked.push_back(s.node);
          } else {
            ranked = nearest_[y - 1];
          }
          Decision d;
          d.candidate = y;
          d.delta = delta;
          d.issue = now_;
          d.resolve = now_ + cfg_.reservation_window - 1;
          // Fixed arm: the best-ranked members not held by another reservation.
          for (NodeId x : ranked) {
            if (static_cast<int>(d.members.size()) == delta) break;
            if (taken(x, in_omega)) continue;
            d.members.push_back(x);
          }
          if (d.members.empty()) break;
          std::sort(d.members.begin(), d.members.end());
          d.delta = static_cast<int>(d.members.size());
          for (NodeId x : d.members) {
            if (!recently_accessed(x)) place(y, x, in_omega);
          }
          d.log_index = log_.decisions.size();
          log_.decisions.push_back({now_, trial_of(now_), y, d.members, 0, 0, 0.0});
          decisions_.push_back(std::move(d));
          break;
        }
      }
    }
    log_.max_delta_sum = std::max(log_.max_delta_sum, delta_sum);
    log_.max_omega = std::max(log_.max_omega, state_.omega.size());
  }
  log_.max_active_reservations = std::max(log_.max_active_reservations, active_list_.size());

  // Deliver: a reservation is used when it beats the node's SR path.
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (!pending_[i]) continue;
    const Pending p = *pending_[i];
    const NodeId x = static_cast<NodeId>(i + 1);
    const Tti pre_latency = now_ - p.trigger_tti + 1;
    if (active_[i] && pre_latency < p.delay) {
      ReservationEntry& r = log_.reservations[*active_[i]];
      r.hit = true;
      r.latency = pre_latency;
      active_[i].reset();
      serve(x, AccessPath::kPreAllocated, pre_latency);
    } else if (now_ >= p.trigger_tti + p.delay) {
      serve(x, AccessPath::kConventional, p.delay);
    }
  }

  // Close reservations that were used or reached the end of their window.
  std::erase_if(active_list_, [&](std::size_t idx) {
    const ReservationEntry& r = log_.reservations[idx];
    const std::size_t i = static_cast<std::size_t>(r.node - 1);
    if (r.hit) return true;
    if (r.tti + cfg_.reservation_window - 1 <= now_) {
      if (active_[i] == idx) active_[i].reset();
      return true;
    }
    return false;
  });

  while (!decisions_.empty() && decisions_.front().resolve <= now_) {
    resolve(decisions_.front());
    decisions_.pop_front();
  }
  const Tti keep_from = now_ - cfg_.reservation_window;
  while (!recent_pre_.empty() && recent_pre_.front().tti < keep_from) recent_pre_.pop_front();

  state_.pending = static_cast<std::size_t>(
      std::count_if(pending_.begin(), pending_.end(), [](const auto& p) { return p.has_value(); }));
  ++now_;
  return state_;
}

std::vector<double> accuracy(std::span<const ReservationEntry> reservations, int n_trials,
                             bool qos_aware) {
  std::vector<double> made(n_trials, 0.0), hits(n_trials, 0.0);
  for (const auto& r : reservations) {
    if (r.trial < 1 || r.trial > n_trials) continue;
    made[r.trial - 1] += 1.0;
    bool ok = r.hit;
    if (ok && qos_aware && r.deadline) ok = static_cast<double>(r.latency) <= *r.deadline;
    if (ok) hits[r.trial - 1] += 1.0;
  }
  std::vector<double> out(n_trials, 0.0);
  for (int s = 0; s < n_trials; ++s) out[s] = made[s] > 0.0 ? hits[s] / made[s] : 0.0;
  return out;
}

std::vector<double> accuracy(const RunReport& report, bool qos_aware) {
  return accuracy(report.log.reservations, report.config.n_trials, qos_aware);
}

RunReport run(const RunConfig& cfg) {
  validate(cfg);
  RunReport report;
  report.config = cfg;

  TrafficConfig traffic = cfg.traffic;
  traffic.seed = cfg.seed;
  const std::vector<Node> nodes = build_topology(traffic);
  const int total_trials = cfg.bootstrap_trials + cfg.n_trials;
  const TriggerTrace trace = generate_triggers(nodes, traffic, total_trials);

  auto delay_rng = make_rng(cfg.seed, kDelayStream);
  std::vector<ScheduledTrigger> scheduled;
  scheduled.reserve(trace.events.size());
  for (const auto& e : trace.events) {
    scheduled.push_back(
        {e.node_id, e.trigger_tti, conventional_access_delay(delay_rng, traffic.conventional_delay_range)});
  }
  report.trigger_count = scheduled.size();

  const Tti period = traffic.plate_period();
  Simulator sim(nodes, std::move(scheduled), cfg, period, cfg.bootstrap_trials);
  std::vector<NodeId> vocab;
  for (const Node& n : nodes) vocab.push_back(n.id);

  Corpus corpus(cfg.sample_cfg.retention_epochs);
  std::size_t consumed = 0;
  int epoch = 0;
  sim.set_reservations_enabled(false);
  for (int plate = 0; plate < total_trials; ++plate) {
    const int since = plate - cfg.bootstrap_trials;
    const bool retrain = since == 0 || (since > 0 && since % cfg.sample_cfg.epoch_length == 0);
    if (retrain) {
      const auto& acc = sim.log().accesses;
      std::span<const AccessRecord> fresh(acc.data() + consumed, acc.size() - consumed);
      corpus.update(epoch++, extract_samples(fresh, nodes, cfg.sample_cfg));
      consumed = acc.size();
      if (!corpus.empty()) {
        auto [model, plan] = epoch_step(corpus.samples(), vocab, cfg.metric, cfg.static_cfg);
        if (report.epochs_trained == 0) report.first_plan = plan;
        ++report.epochs_trained;
        sim.set_plan(std::make_shared<const StaticPlan>(std::move(plan)),
                     std::make_shared<const BayesModel>(std::move(model)));
      } else if (uses_static_stage(cfg.algo)) {
        sim.set_plan(std::make_shared<const StaticPlan>(), nullptr);
      }
      sim.set_reservations_enabled(true);
    }
    const Tti end = static_cast<Tti>(plate + 1) * period;
    while (sim.now() < end) sim.step();
  }
  while (!sim.done()) sim.step();

  report.log = sim.log();

  // Per-trial aggregates over the dynamic stage.
  const auto acc = accuracy(report.log.reservations, cfg.n_trials, false);
  const auto qacc = accuracy(report.log.reservations, cfg.n_trials, true);
  report.trials.resize(cfg.n_trials);
  std::vector<double> util_sum(cfg.n_trials, 0.0), lat_sum(cfg.n_trials, 0.0);
  std::vector<int> util_n(cfg.n_trials, 0);
  for (int s = 0; s < cfg.n_trials; ++s) {
    report.trials[s].trial = s + 1;
    report.trials[s].accuracy = acc[s];
    report.trials[s].qos_accuracy = qacc[s];
  }
  for (const auto& r : report.log.reservations) {
    if (r.trial < 1 || r.trial > cfg.n_trials) continue;
    ++report.trials[r.trial - 1].reservations;
    if (r.hit) ++report.trials[r.trial - 1].hits;
  }
  for (const auto& a : report.log.accesses) {
    const int s = sim.trial_of(a.trigger_tti);
    if (s < 1 || s > cfg.n_trials) continue;
    auto& t = report.trials[s - 1];
    ++t.accesses;
    lat_sum[s - 1] += static_cast<double>(a.latency);
    if (auto q = qos_for(nodes[a.node_id - 1].type)) {
      util_sum[s - 1] += utility(*q, static_cast<double>(a.latency));
      ++util_n[s - 1];
    }
  }
  for (int s = 0; s < cfg.n_trials; ++s) {
    auto& t = report.trials[s];
    t.mean_latency = t.accesses ? lat_sum[s] / t.accesses : 0.0;
    t.mean_utility = util_n[s] ? util_sum[s] / util_n[s] : 0.0;
  }
  return report;
}

std::string fnv1a_hex(std::string_view text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string canonical_config(const RunConfig& cfg) {
  std::ostringstream o;
  const auto d = [](double v) { return csv::format_double(v); };
  o << "algo=" << to_string(cfg.algo) << "\nmetric=" << to_string(cfg.metric)
    << "\nn_res=" << cfg.n_res << "\ngamma=" << d(cfg.gamma) << "\nbeta=" << d(cfg.beta)
    << "\nn_trials=" << cfg.n_trials << "\nbootstrap_trials=" << cfg.bootstrap_trials
    << "\nreservation_window=" << cfg.reservation_window
    << "\ncandidate_lookback=" << cfg.candidate_lookback
    << "\nrecent_access_guard=" << cfg.recent_access_guard
    << "\nadjacency_set_size=" << cfg.adjacency_set_size;
  o << "\nxi=" << cfg.static_cfg.xi;
  for (const auto& [m, a] : cfg.static_cfg.alpha) o << "\nalpha." << to_string(m) << '=' << d(a);
  const auto& s = cfg.sample_cfg;
  o << "\ntime_window=" << s.time_window << "\ndistance_radius=" << d(s.distance_radius)
    << "\nepoch_length=" << s.epoch_length << "\nretention_epochs=" << s.retention_epochs;
  const auto& t = cfg.traffic;
  o << "\nn_per_type=";
  for (std::size_t i = 0; i < t.n_per_type.size(); ++i) o << (i ? ";" : "") << t.n_per_type[i];
  o << "\ninterference_prob=" << d(t.interference_prob) << "\ndynamics_range="
    << d(t.dynamics_range.lo) << ';' << d(t.dynamics_range.hi) << "\ncells=" << t.cells
    << "\nplate_dwell_ttis=" << t.plate_dwell_ttis
    << "\ntrigger_jitter_ttis=" << t.trigger_jitter_ttis
    << "\nplate_gap_ttis=" << t.plate_gap_ttis << "\nconventional_delay_range="
    << t.conventional_delay_range.lo << ';' << t.conventional_delay_range.hi
    << "\ncell_length_m=" << d(t.cell_length_m) << "\nline_width_m=" << d(t.line_width_m)
    << "\nfloor_width_m=" << d(t.floor_width_m)
    << "\ndynamics_resample_trials=" << t.dynamics_resample_trials << '\n';
  return o.str();
}

std::string config_hash(const RunConfig& cfg) { return fnv1a_hex(canonical_config(cfg)); }

void write_trial_csv(std::ostream& out, const RunReport& report) {
  csv::write_hash_comment(out, config_hash(report.config));
  out << "trial,algo,metric,gamma,accuracy,qos_accuracy,mean_latency,mean_utility\n";
  const auto& c = report.config;
  for (const auto& t : report.trials) {
    out << t.trial << ',' << to_string(c.algo) << ',' << to_string(c.metric) << ','
        << csv::format_double(c.gamma) << ',' << csv::format_double(t.accuracy) << ','
        << csv::format_double(t.qos_accuracy) << ',' << csv::format_double(t.mean_latency) << ','
        << csv::format_double(t.mean_utility) << '\n';
  }
}

void write_tti_csv(std::ostream& out, const RunReport& report) {
  csv::write_hash_comment(out, config_hash(report.config));
  out << "tti,candidate,arm_members,hits,misses,reward\n";
  for (const auto& d : report.log.decisions) {
    if (d.trial < 1) continue;
    out << d.tti << ',' << d.candidate << ',' << join_ids(d.members) << ',' << d.hits << ','
        << d.misses << ',' << csv::format_double(d.reward) << '\n';
  }
}

}  // namespace dpre
