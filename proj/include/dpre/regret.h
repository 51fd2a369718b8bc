#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "dpre/dynamic_stage.h"

namespace dpre {

// Expected-regret upper bound of the prior-guided learner against the best
// fixed arm, for K arms, exploration gamma and total gain g_max.
double regret_bound_drp(int k, double gamma, double g_max);

// Classic EXP3 bound for the same quantities.
double regret_bound_exp3(int k, double gamma, double g_max);

// min{1, sqrt(K ln K / ((2e - 3) g))}
double drp_gamma_star(int k, double g);
// min{1, sqrt(K ln K / ((e - 1) g))}
double exp3_gamma_star(int k, double g);

double drp_tuned_bound(int k, double g);        // 2 sqrt((2e-3) ln K g / K) + g
double drp_tuned_bound_loose(int k, double g);  // 3.12 sqrt(ln K g / K) + g
double exp3_tuned_bound(int k, double g);       // 2.63 sqrt(g K ln K)

// Largest g for which regret_bound_drp(k, gamma, g) < regret_bound_exp3(k, gamma, g)
// holds; +infinity when it holds for every g.
double bound_ordering_horizon(int k, double gamma);

enum class AdversaryKind { kStationary, kSwitching, kPeriodic, kDrifting };

std::string_view to_string(AdversaryKind kind);

struct RegretCase {
  int pool_size = 2;  // nodes the arms are drawn from
  int delta = 1;      // arm size; K = C(pool_size, delta)
  int trials = 200;   // S
  double gamma = 0.1;
  double beta = 0.1;
  AdversaryKind adversary = AdversaryKind::kStationary;
  std::uint64_t assignment_seed = 1;
};

// An oblivious adversary's full assignment. served[s] maps every node that
// would be served in trial s (had it been reserved) to its delivery utility.
struct RewardAssignment {
  std::vector<NodeId> pool;
  std::vector<Arm> arms;
  std::vector<std::map<NodeId, double>> served;
  std::vector<std::vector<double>> rewards;  // [trial][arm], true rewards
  double g_max = 0.0;
};

RewardAssignment make_assignment(const RegretCase& c);

// Realized gain of one seeded run. DRP sees only the chosen arm's outcome and
// estimates the others; EXP3 updates the chosen arm only. `prior` empty means
// uniform exploration.
double run_drp(const RewardAssignment& a, double gamma, double beta, std::uint64_t seed,
               std::span<const double> prior = {});
double run_exp3(const RewardAssignment& a, double gamma, std::uint64_t seed);

struct RegretRow {
  std::uint64_t seed = 0;  // assignment seed
  int k = 0;
  int trials = 0;
  double gamma = 0.0;
  std::string algo;
  double g_alg = 0.0;  // mean realized gain over the run seeds
  double g_max = 0.0;
  double regret = 0.0;
  double bound = 0.0;
};

// Evaluates DRP and EXP3 on one assignment over `run_seeds` seeds.
std::vector<RegretRow> evaluate_case(const RegretCase& c, int run_seeds);

// The standard grid: K in {2,4,8}, S in {200,1000}, gamma in {gamma*, 0.3, 0.6},
// `assignments_per_cell` adversaries per (K, S).
std::vector<RegretCase> standard_regret_grid(int assignments_per_cell, std::uint64_t base_seed);

void write_regret_csv(std::ostream& out, std::span<const RegretRow> rows,
                      const std::string& config_hash);

}  // namespace dpre
