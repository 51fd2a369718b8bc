// dpre: command-line front end for the pre-allocation simulator.
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dpre/csv.h"
#include "dpre/errors.h"
#include "dpre/experiment.h"
#include "dpre/regret.h"
#include "dpre/simulator.h"

namespace fs = std::filesystem;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitRuntime = 3;

// Flags shared by the subcommands that take a run configuration.
struct CommonOptions {
  std::string config;
  std::optional<double> gamma;
  std::optional<int> n_res;
  std::optional<int> xi;
  std::optional<double> alpha;
  std::optional<std::string> metric;
  std::optional<std::string> algo;
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  std::string out;
  std::vector<std::string> sets;

  void attach(CLI::App* app) {
    app->add_option("--config", config, "key=value config file");
    app->add_option("--gamma", gamma, "exploration rate in (0, 1]");
    app->add_option("--n-res", n_res, "RBs reserved per TTI");
    app->add_option("--xi", xi, "static reservation set size");
    app->add_option("--alpha", alpha, "admission threshold of the chosen metric");
    app->add_option("--metric", metric, "X, MI or P");
    app->add_option("--algo", algo, "DPre, DPre-wQoS, EXP3, Static, APre, APre-D");
    app->add_option("--seed", seed, "base seed");
    app->add_option("--trials", trials, "trials after the bootstrap");
    app->add_option("--out", out, "output directory (default: $DPRE_OUTPUT_DIR or ./out)");
    app->add_option("--set", sets, "section.key=value override, repeatable");
  }

  dpre::RawConfig raw() const {
    dpre::RawConfig r;
    if (!config.empty()) r = dpre::load_config(config);
    auto put = [&](const std::string& key, const std::string& value) { r.set(key, value); };
    if (gamma) put("run.gamma", dpre::csv::format_double(*gamma));
    if (n_res) put("run.n_res", std::to_string(*n_res));
    if (metric) put("run.metric", *metric);
    if (algo) put("run.algo", *algo);
    if (seed) put("run.seed", std::to_string(*seed));
    if (trials) put("run.n_trials", std::to_string(*trials));
    if (xi) put("static.xi", std::to_string(*xi));
    if (alpha) put("static.alpha", dpre::csv::format_double(*alpha));
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || s.find('.') > eq) {
        throw dpre::ConfigError("--set expects section.key=value, got '" + s + "'");
      }
      put(s.substr(0, eq), s.substr(eq + 1));
    }
    return r;
  }

  dpre::ExperimentSpec spec() const {
    dpre::ExperimentSpec s = dpre::validate_config(raw());
    if (!out.empty()) s.output_dir = out;
    return s;
  }
};

std::ofstream open_out(const fs::path& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  return f;
}

int cmd_run(const CommonOptions& opt, bool tti_log) {
  const dpre::ExperimentSpec spec = opt.spec();
  if (!spec.sweep.empty()) throw dpre::ConfigError("run takes no [sweep]; use the sweep command");
  fs::create_directories(spec.output_dir);
  const dpre::RunReport report = dpre::run(spec.base);
  auto trial = open_out(spec.output_dir / "trials.csv");
  dpre::write_trial_csv(trial, report);
  if (tti_log) {
    auto tti = open_out(spec.output_dir / "tti.csv");
    dpre::write_tti_csv(tti, report);
  }
  double sum = 0.0;
  for (const auto& t : report.trials) sum += t.accuracy;
  std::printf("%s: %zu triggers, %zu reservations, mean accuracy %.4f -> %s\n",
              std::string(dpre::to_string(spec.base.algo)).c_str(), report.trigger_count,
              report.log.reservations.size(), sum / report.trials.size(),
              (spec.output_dir / "trials.csv").c_str());
  return 0;
}

int cmd_sweep(const CommonOptions& opt, std::optional<int> replications,
              std::optional<unsigned> workers) {
  dpre::ExperimentSpec spec = opt.spec();
  if (replications) {
    if (*replications < 1) throw dpre::ConfigError("replications must be at least 1");
    spec.replications = *replications;
  }
  if (workers) spec.workers = *workers;
  const auto manifest = dpre::run_experiment(spec);
  std::printf("%zu points x %d seeds -> %s\n", manifest["points"].size(), spec.replications,
              (spec.output_dir / "manifest.json").c_str());
  return 0;
}

int cmd_replay(const std::string& manifest_path, const std::string& out) {
  std::ifstream in(manifest_path);
  if (!in) throw dpre::ConfigError("cannot open manifest " + manifest_path);
  nlohmann::json manifest;
  try {
    in >> manifest;
  } catch (const nlohmann::json::exception& e) {
    throw dpre::ConfigError("malformed manifest: " + std::string(e.what()));
  }
  const fs::path dir = out.empty() ? dpre::default_output_dir() : fs::path(out);
  dpre::run_experiment(dpre::spec_from_manifest(manifest, dir));
  std::printf("replayed -> %s\n", dir.c_str());
  return 0;
}

int cmd_regret(int assignments, int run_seeds, std::uint64_t seed, const std::string& out) {
  if (assignments < 1 || run_seeds < 1) {
    throw dpre::ConfigError("assignments and run seeds must be positive");
  }
  const fs::path dir = out.empty() ? dpre::default_output_dir() : fs::path(out);
  fs::create_directories(dir);
  std::vector<dpre::RegretRow> rows;
  int within = 0;
  int cases = 0;
  for (const auto& c : dpre::standard_regret_grid(assignments, seed)) {
    const auto r = dpre::evaluate_case(c, run_seeds);
    ++cases;
    if (r[0].regret <= r[0].bound) ++within;
    rows.insert(rows.end(), r.begin(), r.end());
  }
  auto f = open_out(dir / "regret.csv");
  const std::string tag = "regret:assignments=" + std::to_string(assignments) +
                          ";run_seeds=" + std::to_string(run_seeds) +
                          ";seed=" + std::to_string(seed);
  dpre::write_regret_csv(f, rows, dpre::fnv1a_hex(tag));
  std::printf("DRP within bound in %d/%d cases -> %s\n", within, cases,
              (dir / "regret.csv").c_str());
  return 0;
}

int cmd_threshold(const CommonOptions& opt, double alpha_max, double alpha_step) {
  if (!(alpha_step > 0.0) || !(alpha_max >= 0.0)) {
    throw dpre::ConfigError("alpha range must be non-negative with a positive step");
  }
  const dpre::ExperimentSpec spec = opt.spec();
  std::vector<double> alphas;
  for (int i = 0; i * alpha_step <= alpha_max + 1e-9; ++i) alphas.push_back(i * alpha_step);
  const auto curve = dpre::threshold_analysis(spec.base, alphas);
  fs::create_directories(spec.output_dir);
  auto f = open_out(spec.output_dir / "threshold.csv");
  dpre::write_threshold_csv(f, curve, dpre::config_hash(spec.base));
  std::printf("%zu thresholds -> %s\n", curve.size(),
              (spec.output_dir / "threshold.csv").c_str());
  return 0;
}

int cmd_inspect(const CommonOptions& opt) {
  const dpre::ExperimentSpec spec = opt.spec();
  const auto boot = dpre::bootstrap(spec.base);
  fs::create_directories(spec.output_dir);
  const auto& dir = spec.output_dir;
  auto topo = open_out(dir / "topology.csv");
  dpre::write_topology_csv(topo, boot.nodes);
  auto trig = open_out(dir / "triggers.csv");
  dpre::write_trigger_csv(trig, boot.trace.events);
  auto corpus = open_out(dir / "corpus.csv");
  dpre::write_corpus_csv(corpus, boot.samples);
  auto cond = open_out(dir / "model_conditional.csv");
  boot.model.write_conditional_csv(cond);
  auto prior = open_out(dir / "model_prior.csv");
  boot.model.write_prior_csv(prior);
  auto plan = open_out(dir / "plan.csv");
  dpre::write_plan_csv(plan, boot.plan);
  std::printf("%zu nodes, %zu samples, %zu candidates -> %s\n", boot.nodes.size(),
              boot.samples.size(), boot.plan.candidates.size(), dir.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Predictive uplink pre-allocation simulator"};
  app.require_subcommand(1);
  app.set_version_flag("--version", dpre::version_string());

  CommonOptions run_opt, sweep_opt, threshold_opt, inspect_opt;
  bool tti_log = false;
  auto* run = app.add_subcommand("run", "simulate one configuration");
  run_opt.attach(run);
  run->add_flag("--tti-log", tti_log, "also write the per-TTI decision log");

  std::optional<int> replications;
  std::optional<unsigned> workers;
  auto* sweep = app.add_subcommand("sweep", "run a parameter grid over several seeds");
  sweep_opt.attach(sweep);
  sweep->add_option("--replications", replications, "seeds per grid point");
  sweep->add_option("--workers", workers, "worker threads (0 = all cores)");

  std::string manifest_path, replay_out;
  auto* replay = app.add_subcommand("replay", "re-run the experiment recorded in a manifest");
  replay->add_option("manifest", manifest_path, "manifest.json")->required();
  replay->add_option("--out", replay_out, "output directory");

  int assignments = 100;
  int run_seeds = 5;
  std::uint64_t regret_seed = 1;
  std::string regret_out;
  auto* regret = app.add_subcommand("regret", "empirical regret against the analytic bounds");
  regret->add_option("--assignments", assignments, "adversarial assignments per (K, S) cell");
  regret->add_option("--run-seeds", run_seeds, "learner seeds per assignment");
  regret->add_option("--seed", regret_seed, "base assignment seed");
  regret->add_option("--out", regret_out, "output directory");

  double alpha_max = 200.0;
  double alpha_step = 1.0;
  auto* threshold = app.add_subcommand("threshold", "admission error rates over thresholds");
  threshold_opt.attach(threshold);
  threshold->add_option("--alpha-max", alpha_max, "largest threshold");
  threshold->add_option("--alpha-step", alpha_step, "threshold spacing");

  auto* inspect = app.add_subcommand("inspect", "dump topology, triggers, corpus, model and plan");
  inspect_opt.attach(inspect);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitConfig;
  }

  try {
    if (*run) return cmd_run(run_opt, tti_log);
    if (*sweep) return cmd_sweep(sweep_opt, replications, workers);
    if (*replay) return cmd_replay(manifest_path, replay_out);
    if (*regret) return cmd_regret(assignments, run_seeds, regret_seed, regret_out);
    if (*threshold) return cmd_threshold(threshold_opt, alpha_max, alpha_step);
    if (*inspect) return cmd_inspect(inspect_opt);
  } catch (const dpre::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitRuntime;
  }
  return 0;
}
