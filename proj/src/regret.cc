#include "dpre/regret.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>

#include "dpre/csv.h"
#include "dpre/errors.h"
#include "dpre/topology.h"

namespace dpre {
namespace {

constexpr double kE = std::numbers::e;

void check_args(int k, double gamma) {
  if (k < 1) throw ConfigError("regret bound: K must be positive");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("regret bound: gamma must lie in (0, 1]");
}

}  // namespace

double regret_bound_drp(int k, double gamma, double g_max) {
  check_args(k, gamma);
  const double kk = k;
  return (1.0 - gamma) / gamma * std::log(kk) + (gamma * (2.0 * kE - 3.0) + kk - 1.0) / kk * g_max;
}

double regret_bound_exp3(int k, double gamma, double g_max) {
  check_args(k, gamma);
  const double kk = k;
  return kk * std::log(kk) / gamma + (kE - 1.0) * gamma * g_max;
}

double drp_gamma_star(int k, double g) {
  if (!(g > 0.0)) return 1.0;
  return std::min(1.0, std::sqrt(k * std::log(static_cast<double>(k)) / ((2.0 * kE - 3.0) * g)));
}

double exp3_gamma_star(int k, double g) {
  if (!(g > 0.0)) return 1.0;
  return std::min(1.0, std::sqrt(k * std::log(static_cast<double>(k)) / ((kE - 1.0) * g)));
}

double drp_tuned_bound(int k, double g) {
  return 2.0 * std::sqrt((2.0 * kE - 3.0) * std::log(static_cast<double>(k)) * g / k) + g;
}

double drp_tuned_bound_loose(int k, double g) {
  return 3.12 * std::sqrt(std::log(static_cast<double>(k)) * g / k) + g;
}

double exp3_tuned_bound(int k, double g) {
  return 2.63 * std::sqrt(g * k * std::log(static_cast<double>(k)));
}

double bound_ordering_horizon(int k, double gamma) {
  check_args(k, gamma);
  const double kk = k;
  // drp < exp3  <=>  g * slope < intercept
  const double slope = (gamma * (2.0 * kE - 3.0) + kk - 1.0) / kk - (kE - 1.0) * gamma;
  const double intercept = (kk - 1.0 + gamma) * std::log(kk) / gamma;
  if (!(intercept > 0.0)) return 0.0;
  if (slope <= 0.0) return std::numeric_limits<double>::infinity();
  return intercept / slope;
}

std::string_view to_string(AdversaryKind kind) {
  switch (kind) {
    case AdversaryKind::kStationary: return "stationary";
    case AdversaryKind::kSwitching: return "switching";
    case AdversaryKind::kPeriodic: return "periodic";
    case AdversaryKind::kDrifting: return "drifting";
  }
  return "?";
}

RewardAssignment make_assignment(const RegretCase& c) {
  if (c.pool_size < 1 || c.delta < 1 || c.delta > c.pool_size) {
    throw ConfigError("regret case: need 1 <= delta <= pool_size");
  }
  if (c.trials < 1) throw ConfigError("regret case: trials must be positive");
  auto rng = make_rng(c.assignment_seed, 7);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  RewardAssignment a;
  for (int i = 1; i <= c.pool_size; ++i) a.pool.push_back(i);
  a.arms = enumerate_arms(a.pool, c.delta);

  const int n = c.pool_size;
  std::vector<double> p(n), p_end(n);
  std::vector<int> period(n), duty(n), offset(n);
  for (int i = 0; i < n; ++i) {
    p[i] = unit(rng);
    p_end[i] = unit(rng);
    period[i] = 2 + static_cast<int>(unit(rng) * 20);
    duty[i] = static_cast<int>(unit(rng) * period[i]);
    offset[i] = static_cast<int>(unit(rng) * period[i]);
  }
  std::vector<int> switches;
  for (int i = 0; i < 3; ++i) switches.push_back(static_cast<int>(unit(rng) * c.trials));

  a.served.resize(c.trials);
  for (int s = 0; s < c.trials; ++s) {
    if (c.adversary == AdversaryKind::kSwitching &&
        std::find(switches.begin(), switches.end(), s) != switches.end()) {
      for (double& v : p) v = unit(rng);
    }
    for (int i = 0; i < n; ++i) {
      bool hit = false;
      switch (c.adversary) {
        case AdversaryKind::kStationary:
        case AdversaryKind::kSwitching:
          hit = unit(rng) < p[i];
          break;
        case AdversaryKind::kPeriodic:
          hit = (s + offset[i]) % period[i] < duty[i];
          break;
        case AdversaryKind::kDrifting: {
          const double w = static_cast<double>(s) / c.trials;
          hit = unit(rng) < (1.0 - w) * p[i] + w * p_end[i];
          break;
        }
      }
      const double u = 0.3 + 0.7 * unit(rng);
      if (hit) a.served[s][a.pool[i]] = u;
    }
  }

  a.rewards.assign(c.trials, std::vector<double>(a.arms.size(), 0.0));
  std::vector<double> totals(a.arms.size(), 0.0);
  for (int s = 0; s < c.trials; ++s) {
    for (std::size_t k = 0; k < a.arms.size(); ++k) {
      // The true reward is what the arm would have earned had it been reserved.
      const ArmFeedback full = make_feedback(a.arms[k], a.served[s]);
      a.rewards[s][k] = drp_reward(a.arms[k], full, c.delta, c.beta);
      totals[k] += a.rewards[s][k];
    }
  }
  a.g_max = *std::max_element(totals.begin(), totals.end());
  return a;
}

double run_drp(const RewardAssignment& a, double gamma, double beta, std::uint64_t seed,
               std::span<const double> prior) {
  auto rng = make_rng(seed, 11);
  const int delta = static_cast<int>(a.arms.front().size());
  ArmTable table(a.pool, a.arms,
                 prior.empty() ? uniform_prior(a.arms.size())
                               : std::vector<double>(prior.begin(), prior.end()));
  double gain = 0.0;
  std::vector<double> rewards(a.arms.size());
  for (std::size_t s = 0; s < a.served.size(); ++s) {
    const Selection sel = drp_select(table, gamma, rng);
    const Arm& chosen = a.arms[sel.arm];
    // Only reserved nodes are observed.
    std::map<NodeId, double> observed;
    for (NodeId x : chosen) {
      auto it = a.served[s].find(x);
      if (it != a.served[s].end()) observed.insert(*it);
    }
    const ArmFeedback fb = make_feedback(chosen, observed);
    const double r = drp_reward(chosen, fb, delta, beta);
    gain += a.rewards[s][sel.arm];
    for (std::size_t k = 0; k < a.arms.size(); ++k) {
      rewards[k] = k == sel.arm ? r : drp_estimate_others(a.arms[k], fb, delta, beta, r);
    }
    table.drp_update(sel.probs, sel.arm, rewards, gamma);
  }
  return gain;
}

double run_exp3(const RewardAssignment& a, double gamma, std::uint64_t seed) {
  auto rng = make_rng(seed, 11);
  ArmTable table(a.pool, a.arms, uniform_prior(a.arms.size()));
  double gain = 0.0;
  for (std::size_t s = 0; s < a.served.size(); ++s) {
    const Selection sel = exp3_select(table, gamma, rng);
    const double r = a.rewards[s][sel.arm];
    gain += r;
    table.exp3_update(sel.probs, sel.arm, r, gamma);
  }
  return gain;
}

std::vector<RegretRow> evaluate_case(const RegretCase& c, int run_seeds) {
  if (run_seeds < 1) throw ConfigError("regret: need at least one run seed");
  const RewardAssignment a = make_assignment(c);
  const int k = static_cast<int>(a.arms.size());
  double drp_sum = 0.0;
  double exp3_sum = 0.0;
  for (int r = 0; r < run_seeds; ++r) {
    const std::uint64_t seed = c.assignment_seed * 1000003ULL + static_cast<std::uint64_t>(r);
    drp_sum += run_drp(a, c.gamma, c.beta, seed);
    exp3_sum += run_exp3(a, c.gamma, seed);
  }
  auto row = [&](const char* algo, double mean_gain, double bound) {
    return RegretRow{c.assignment_seed, k, c.trials, c.gamma, algo, mean_gain, a.g_max,
                     a.g_max - mean_gain, bound};
  };
  return {row("DRP", drp_sum / run_seeds, regret_bound_drp(k, c.gamma, a.g_max)),
          row("EXP3", exp3_sum / run_seeds, regret_bound_exp3(k, c.gamma, a.g_max))};
}

std::vector<RegretCase> standard_regret_grid(int assignments_per_cell, std::uint64_t base_seed) {
  struct Shape {
    int pool;
    int delta;
  };
  // K = 2, 4, 8 with overlapping arms where possible.
  const Shape shapes[] = {{2, 1}, {4, 3}, {8, 7}};
  const int horizons[] = {200, 1000};
  const AdversaryKind kinds[] = {AdversaryKind::kStationary, AdversaryKind::kSwitching,
                                 AdversaryKind::kPeriodic, AdversaryKind::kDrifting};
  std::vector<RegretCase> grid;
  std::uint64_t seed = base_seed;
  for (const Shape& sh : shapes) {
    std::vector<NodeId> ids(sh.pool);
    for (int i = 0; i < sh.pool; ++i) ids[i] = i + 1;
    const int k = static_cast<int>(enumerate_arms(ids, sh.delta).size());
    for (int s : horizons) {
      for (int i = 0; i < assignments_per_cell; ++i) {
        for (double gamma : {drp_gamma_star(k, s), 0.3, 0.6}) {
          RegretCase c;
          c.pool_size = sh.pool;
          c.delta = sh.delta;
          c.trials = s;
          c.gamma = gamma;
          c.adversary = kinds[i % 4];
          c.assignment_seed = seed;
          grid.push_back(c);
        }
        ++seed;
      }
    }
  }
  return grid;
}

void write_regret_csv(std::ostream& out, std::span<const RegretRow> rows,
                      const std::string& config_hash) {
  csv::write_hash_comment(out, config_hash);
  out << "seed,K,S,gamma,algo,G_alg,G_max,regret,bound\n";
  for (const auto& r : rows) {
    out << r.seed << ',' << r.k << ',' << r.trials << ',' << csv::format_double(r.gamma) << ','
        << r.algo << ',' << csv::format_double(r.g_alg) << ',' << csv::format_double(r.g_max)
        << ',' << csv::format_double(r.regret) << ',' << csv::format_double(r.bound) << '\n';
  }
}

}  // namespace dpre
