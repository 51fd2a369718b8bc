#include "dpre/experiment.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <mutex>
#include <sstream>
#include <thread>

#include "dpre/csv.h"
#include "dpre/errors.h"

#ifndef DPRE_VERSION
#define DPRE_VERSION "0.0.0"
#endif

namespace dpre {
namespace {

template <typename T>
T parse_number(const std::string& name, const std::string& text) {
  const std::string v = csv::trim(text);
  T out{};
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || v.empty()) {
    throw ConfigError("'" + name + "': cannot parse '" + v + "' as a number");
  }
  return out;
}

int to_int(const std::string& n, const std::string& v) { return parse_number<int>(n, v); }
Tti to_tti(const std::string& n, const std::string& v) { return parse_number<Tti>(n, v); }
double to_double(const std::string& n, const std::string& v) {
  const double d = parse_number<double>(n, v);
  if (!std::isfinite(d)) throw ConfigError("'" + n + "' must be finite");
  return d;
}

std::string fmt(double v) { return csv::format_double(v); }

struct Setting {
  std::string section;
  std::string name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;  // empty for write-only aliases
};

const std::vector<Setting>& settings() {
  static const std::vector<Setting> table = [] {
    std::vector<Setting> s;
    auto add = [&](std::string sec, std::string name, auto set, auto get) {
      s.push_back({std::move(sec), std::move(name), set, get});
    };
#define DPRE_INT(sec, key, field)                                                       \
  add(sec, key, [](RunConfig& c, const std::string& v) { c.field = to_int(key, v); }, \
      [](const RunConfig& c) { return std::to_string(c.field); })
#define DPRE_TTI(sec, key, field)                                                       \
  add(sec, key, [](RunConfig& c, const std::string& v) { c.field = to_tti(key, v); }, \
      [](const RunConfig& c) { return std::to_string(c.field); })
#define DPRE_DBL(sec, key, field)                                                          \
  add(sec, key, [](RunConfig& c, const std::string& v) { c.field = to_double(key, v); }, \
      [](const RunConfig& c) { return fmt(c.field); })

    add("run", "algo",
        [](RunConfig& c, const std::string& v) { c.algo = parse_algorithm(csv::trim(v)); },
        [](const RunConfig& c) { return std::string(to_string(c.algo)); });
    add("run", "metric",
        [](RunConfig& c, const std::string& v) {
          try {
            c.metric = parse_metric(csv::trim(v));
          } catch (const std::exception&) {
            throw ConfigError("unknown metric '" + csv::trim(v) + "'");
          }
        },
        [](const RunConfig& c) { return std::string(to_string(c.metric)); });
    DPRE_INT("run", "n_res", n_res);
    DPRE_DBL("run", "gamma", gamma);
    DPRE_DBL("run", "beta", beta);
    DPRE_INT("run", "n_trials", n_trials);
    DPRE_INT("run", "bootstrap_trials", bootstrap_trials);
    DPRE_TTI("run", "reservation_window", reservation_window);
    DPRE_TTI("run", "candidate_lookback", candidate_lookback);
    DPRE_TTI("run", "recent_access_guard", recent_access_guard);
    DPRE_INT("run", "adjacency_set_size", adjacency_set_size);
    add("run", "seed",
        [](RunConfig& c, const std::string& v) {
          c.seed = parse_number<std::uint64_t>("seed", v);
        },
        [](const RunConfig& c) { return std::to_string(c.seed); });

    DPRE_INT("static", "xi", static_cfg.xi);
    // `alpha` sets the threshold of the configured metric.
    add("static", "alpha",
        [](RunConfig& c, const std::string& v) {
          c.static_cfg.alpha[c.metric] = to_double("alpha", v);
        },
        nullptr);
    for (Metric m : {Metric::kChiSquare, Metric::kMutualInformation, Metric::kPosterior}) {
      const std::string key = "alpha_" + std::string(to_string(m));
      add("static", key,
          [m, key](RunConfig& c, const std::string& v) {
            c.static_cfg.alpha[m] = to_double(key, v);
          },
          [m](const RunConfig& c) { return fmt(c.static_cfg.alpha_for(m)); });
    }

    DPRE_TTI("samples", "time_window", sample_cfg.time_window);
    DPRE_DBL("samples", "distance_radius", sample_cfg.distance_radius);
    DPRE_INT("samples", "epoch_length", sample_cfg.epoch_length);
    DPRE_INT("samples", "retention_epochs", sample_cfg.retention_epochs);

    add("traffic", "preset",
        [](RunConfig& c, const std::string& v) {
          const std::string name = csv::trim(v);
          if (name == "desk") {
            c.traffic = desk_scale_traffic();
          } else if (name == "table1") {
            c.traffic = table1_traffic();
          } else {
            throw ConfigError("unknown traffic preset '" + name + "' (desk, table1)");
          }
        },
        nullptr);
    for (std::size_t t = 0; t < kNumSensingTypes; ++t) {
      const std::string key = "n_" + std::string(to_string(static_cast<SensingType>(t)));
      add("traffic", key,
          [t, key](RunConfig& c, const std::string& v) { c.traffic.n_per_type[t] = to_int(key, v); },
          [t](const RunConfig& c) { return std::to_string(c.traffic.n_per_type[t]); });
    }
    DPRE_DBL("traffic", "interference_prob", traffic.interference_prob);
    DPRE_DBL("traffic", "dynamics_lo", traffic.dynamics_range.lo);
    DPRE_DBL("traffic", "dynamics_hi", traffic.dynamics_range.hi);
    DPRE_INT("traffic", "cells", traffic.cells);
    DPRE_TTI("traffic", "plate_dwell_ttis", traffic.plate_dwell_ttis);
    DPRE_TTI("traffic", "trigger_jitter_ttis", traffic.trigger_jitter_ttis);
    DPRE_TTI("traffic", "plate_gap_ttis", traffic.plate_gap_ttis);
    DPRE_TTI("traffic", "delay_lo", traffic.conventional_delay_range.lo);
    DPRE_TTI("traffic", "delay_hi", traffic.conventional_delay_range.hi);
    DPRE_DBL("traffic", "cell_length_m", traffic.cell_length_m);
    DPRE_DBL("traffic", "line_width_m", traffic.line_width_m);
    DPRE_DBL("traffic", "floor_width_m", traffic.floor_width_m);
    DPRE_INT("traffic", "dynamics_resample_trials", traffic.dynamics_resample_trials);
#undef DPRE_INT
#undef DPRE_TTI
#undef DPRE_DBL
    return s;
  }();
  return table;
}

const Setting* find_setting(const std::string& name) {
  for (const auto& s : settings()) {
    if (s.name == name) return &s;
  }
  return nullptr;
}

// Presets and the metric must land before keys that depend on them.
int apply_rank(const std::string& name) {
  if (name == "preset") return 0;
  if (name == "metric") return 1;
  return 2;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  for (const auto& part : csv::split(text, ',')) {
    const std::string v = csv::trim(part);
    if (!v.empty()) out.push_back(v);
  }
  return out;
}

void check_experiment_ranges(const RunConfig& cfg) {
  if (cfg.gamma <= 0.0 || cfg.gamma > 1.0) {
    throw ConfigError(
        "gamma must lie in (0, 1]: it is the exploration share of the arm distribution, and the "
        "regret analysis divides by it");
  }
  if (cfg.n_res < 1) throw ConfigError("n_res must be at least 1");
  validate(cfg);
}

struct JobResult {
  std::vector<TrialStats> trials;
};

}  // namespace

void RawConfig::set(std::string key, std::string value) {
  for (auto& [k, v] : entries) {
    if (k == key) {
      v = std::move(value);
      return;
    }
  }
  entries.emplace_back(std::move(key), std::move(value));
}

bool RawConfig::has(const std::string& key) const {
  return std::any_of(entries.begin(), entries.end(), [&](const auto& e) { return e.first == key; });
}

RawConfig parse_config(std::istream& in) {
  RawConfig raw;
  std::string section = "run";
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // A '#' or ';' after whitespace starts a trailing comment.
    for (std::size_t i = 1; i < line.size(); ++i) {
      if ((line[i] == '#' || line[i] == ';') && (line[i - 1] == ' ' || line[i - 1] == '\t')) {
        line.resize(i);
        break;
      }
    }
    const std::string t = csv::trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": bad section");
      section = csv::trim(std::string_view(t).substr(1, t.size() - 2));
      if (section != "run" && section != "static" && section != "samples" &&
          section != "traffic" && section != "sweep" && section != "experiment") {
        throw ConfigError("line " + std::to_string(line_no) + ": unknown section [" + section +
                          "]");
      }
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    }
    const std::string key = csv::trim(std::string_view(t).substr(0, eq));
    const std::string value = csv::trim(std::string_view(t).substr(eq + 1));
    if (key.empty()) throw ConfigError("line " + std::to_string(line_no) + ": empty key");
    raw.set(section + "." + key, value);
  }
  return raw;
}

RawConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse_config(in);
}

bool is_setting(const std::string& name) { return find_setting(name) != nullptr; }

void apply_setting(RunConfig& cfg, const std::string& name, const std::string& value) {
  const Setting* s = find_setting(name);
  if (!s) throw ConfigError("unknown parameter '" + name + "'");
  s->set(cfg, value);
}

ExperimentSpec validate_config(const RawConfig& raw) {
  ExperimentSpec spec;
  spec.output_dir = default_output_dir();

  std::vector<std::pair<std::string, std::string>> run_keys;
  for (const auto& [full, value] : raw.entries) {
    const auto dot = full.find('.');
    const std::string section = full.substr(0, dot);
    const std::string key = full.substr(dot + 1);
    if (section == "sweep") {
      if (!is_setting(key) || key == "preset") {
        throw ConfigError("unknown sweep parameter '" + key + "'");
      }
      auto values = split_list(value);
      if (values.empty()) throw ConfigError("sweep parameter '" + key + "' has no values");
      spec.sweep.emplace_back(key, std::move(values));
    } else if (section == "experiment") {
      if (key == "replications") {
        spec.replications = to_int(key, value);
      } else if (key == "output_dir") {
        spec.output_dir = value;
      } else if (key == "workers") {
        spec.workers = static_cast<unsigned>(std::max(0, to_int(key, value)));
      } else {
        throw ConfigError("unknown experiment key '" + key + "'");
      }
    } else {
      const Setting* s = find_setting(key);
      if (!s) throw ConfigError("unknown parameter '" + key + "'");
      if (s->section != section) {
        throw ConfigError("'" + key + "' belongs in [" + s->section + "], not [" + section + "]");
      }
      run_keys.emplace_back(key, value);
    }
  }
  if (spec.replications < 1) throw ConfigError("replications must be at least 1");

  std::stable_sort(run_keys.begin(), run_keys.end(), [](const auto& a, const auto& b) {
    return apply_rank(a.first) < apply_rank(b.first);
  });
  for (const auto& [k, v] : run_keys) apply_setting(spec.base, k, v);
  for (const auto& s : settings()) {
    if (!s.get) continue;
    const bool given = std::any_of(run_keys.begin(), run_keys.end(),
                                   [&](const auto& e) { return e.first == s.name; });
    if (!given) spec.defaulted.push_back(s.name);
  }
  check_experiment_ranges(spec.base);
  // Every sweep point must be valid before anything runs.
  for (const auto& p : expand_sweep(spec)) check_experiment_ranges(p.config);
  return spec;
}

std::vector<SweepPoint> expand_sweep(const ExperimentSpec& spec) {
  std::vector<SweepPoint> points{{{}, spec.base}};
  // Cartesian product in the order the sweep keys were written.
  for (const auto& [name, values] : spec.sweep) {
    std::vector<SweepPoint> next;
    for (const auto& p : points) {
      for (const auto& v : values) {
        SweepPoint q = p;
        q.params.emplace_back(name, v);
        next.push_back(std::move(q));
      }
    }
    points = std::move(next);
  }
  for (auto& p : points) {
    auto params = p.params;
    std::stable_sort(params.begin(), params.end(), [](const auto& a, const auto& b) {
      return apply_rank(a.first) < apply_rank(b.first);
    });
    for (const auto& [k, v] : params) apply_setting(p.config, k, v);
  }
  return points;
}

std::string to_config_text(const ExperimentSpec& spec) {
  std::ostringstream o;
  for (const char* section : {"run", "static", "samples", "traffic"}) {
    o << '[' << section << "]\n";
    for (const auto& s : settings()) {
      if (s.section == section && s.get) o << s.name << " = " << s.get(spec.base) << '\n';
    }
  }
  if (!spec.sweep.empty()) {
    o << "[sweep]\n";
    for (const auto& [name, values] : spec.sweep) {
      o << name << " = ";
      for (std::size_t i = 0; i < values.size(); ++i) o << (i ? "," : "") << values[i];
      o << '\n';
    }
  }
  o << "[experiment]\nreplications = " << spec.replications << '\n';
  return o.str();
}

std::filesystem::path default_output_dir() {
  if (const char* env = std::getenv("DPRE_OUTPUT_DIR"); env && *env) return env;
  return "out";
}

MeanStd mean_std(std::span<const double> values) {
  MeanStd r;
  if (values.empty()) return r;
  double sum = 0.0;
  for (double v : values) sum += v;
  r.mean = sum / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - r.mean) * (v - r.mean);
    r.stdev = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  return r;
}

std::string version_string() { return DPRE_VERSION; }

nlohmann::json run_experiment(const ExperimentSpec& spec) {
  check_experiment_ranges(spec.base);
  const auto points = expand_sweep(spec);
  for (const auto& p : points) check_experiment_ranges(p.config);
  std::vector<std::uint64_t> seeds;
  for (int r = 0; r < spec.replications; ++r) seeds.push_back(spec.base.seed + r);

  std::filesystem::create_directories(spec.output_dir);

  const std::size_t n_jobs = points.size() * seeds.size();
  std::vector<JobResult> results(n_jobs);
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    while (true) {
      const std::size_t j = next.fetch_add(1);
      if (j >= n_jobs) return;
      {
        std::lock_guard lock(error_mutex);
        if (error) return;
      }
      try {
        RunConfig cfg = points[j / seeds.size()].config;
        cfg.seed = seeds[j % seeds.size()];
        results[j].trials = run(cfg).trials;
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  unsigned n_workers = spec.workers ? spec.workers : std::max(1u, std::thread::hardware_concurrency());
  n_workers = static_cast<unsigned>(std::min<std::size_t>(n_workers, std::max<std::size_t>(1, n_jobs)));
  {
    std::vector<std::jthread> pool;
    for (unsigned i = 0; i < n_workers; ++i) pool.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  nlohmann::json manifest;
  manifest["tool"] = "dpre";
  manifest["version"] = version_string();
  manifest["config_hash"] = config_hash(spec.base);
  manifest["config_text"] = to_config_text(spec);
  manifest["seeds"] = seeds;
  manifest["replications"] = spec.replications;
  manifest["defaults"] = spec.defaulted;
  nlohmann::json resolved;
  for (const auto& s : settings()) {
    if (s.get) resolved[s.name] = s.get(spec.base);
  }
  manifest["resolved"] = resolved;
  nlohmann::json sweep = nlohmann::json::array();
  for (const auto& [name, values] : spec.sweep) sweep.push_back({{"name", name}, {"values", values}});
  manifest["sweep"] = sweep;

  std::ofstream agg(spec.output_dir / "aggregate.csv");
  std::ofstream summary(spec.output_dir / "summary.csv");
  csv::write_hash_comment(agg, config_hash(spec.base));
  csv::write_hash_comment(summary, config_hash(spec.base));
  // algo, metric and gamma already have their own columns.
  auto own_column = [](const std::string& name) {
    return name == "algo" || name == "metric" || name == "gamma";
  };
  std::string param_header;
  for (const auto& [name, values] : spec.sweep) {
    if (!own_column(name)) param_header += name + ",";
  }
  agg << "point," << param_header
      << "trial,algo,metric,gamma,n_seeds,accuracy_mean,accuracy_std,qos_accuracy_mean,"
         "qos_accuracy_std,mean_latency_mean,mean_latency_std,mean_utility_mean,"
         "mean_utility_std\n";
  summary << "point," << param_header
          << "algo,metric,gamma,n_seeds,accuracy_mean,accuracy_std,qos_accuracy_mean,"
             "qos_accuracy_std,last20_accuracy_mean,last20_accuracy_std\n";

  nlohmann::json point_list = nlohmann::json::array();
  for (std::size_t pi = 0; pi < points.size(); ++pi) {
    const auto& p = points[pi];
    char name[32];
    std::snprintf(name, sizeof name, "point_%03zu.csv", pi);
    const std::string hash = config_hash(p.config);
    nlohmann::json params = nlohmann::json::object();
    for (const auto& [k, v] : p.params) params[k] = v;
    point_list.push_back({{"index", pi}, {"file", name}, {"config_hash", hash}, {"params", params}});

    std::ofstream out(spec.output_dir / name);
    csv::write_hash_comment(out, hash);
    out << "seed,trial,algo,metric,gamma,accuracy,qos_accuracy,mean_latency,mean_utility\n";
    const auto& c = p.config;
    const std::string fixed = std::string(to_string(c.algo)) + ',' +
                              std::string(to_string(c.metric)) + ',' + fmt(c.gamma);
    for (std::size_t si = 0; si < seeds.size(); ++si) {
      for (const auto& t : results[pi * seeds.size() + si].trials) {
        out << seeds[si] << ',' << t.trial << ',' << fixed << ',' << fmt(t.accuracy) << ','
            << fmt(t.qos_accuracy) << ',' << fmt(t.mean_latency) << ',' << fmt(t.mean_utility)
            << '\n';
      }
    }

    std::string param_cells;
    for (const auto& [k, v] : p.params) {
      if (!own_column(k)) param_cells += v + ",";
    }
    const std::size_t n_seeds = seeds.size();
    for (int s = 0; s < c.n_trials; ++s) {
      std::vector<double> acc, qacc, lat, util;
      for (std::size_t si = 0; si < n_seeds; ++si) {
        const auto& t = results[pi * n_seeds + si].trials[s];
        acc.push_back(t.accuracy);
        qacc.push_back(t.qos_accuracy);
        lat.push_back(t.mean_latency);
        util.push_back(t.mean_utility);
      }
      agg << pi << ',' << param_cells << s + 1 << ',' << fixed << ',' << n_seeds;
      for (const auto* series : {&acc, &qacc, &lat, &util}) {
        const MeanStd m = mean_std(*series);
        agg << ',' << fmt(m.mean) << ',' << fmt(m.stdev);
      }
      agg << '\n';
    }

    std::vector<double> run_acc, run_qacc, run_last;
    for (std::size_t si = 0; si < n_seeds; ++si) {
      const auto& trials = results[pi * n_seeds + si].trials;
      double a = 0.0, q = 0.0, l = 0.0;
      const std::size_t tail_from = trials.size() > 20 ? trials.size() - 20 : 0;
      for (std::size_t i = 0; i < trials.size(); ++i) {
        a += trials[i].accuracy;
        q += trials[i].qos_accuracy;
        if (i >= tail_from) l += trials[i].accuracy;
      }
      run_acc.push_back(a / trials.size());
      run_qacc.push_back(q / trials.size());
      run_last.push_back(l / (trials.size() - tail_from));
    }
    summary << pi << ',' << param_cells << fixed << ',' << n_seeds;
    for (const auto* series : {&run_acc, &run_qacc, &run_last}) {
      const MeanStd m = mean_std(*series);
      summary << ',' << fmt(m.mean) << ',' << fmt(m.stdev);
    }
    summary << '\n';
  }
  manifest["points"] = point_list;
  manifest["outputs"] = {{"aggregate", "aggregate.csv"}, {"summary", "summary.csv"}};

  std::ofstream mf(spec.output_dir / "manifest.json");
  mf << manifest.dump(2) << '\n';
  if (!mf) throw std::runtime_error("failed writing manifest to " + spec.output_dir.string());
  return manifest;
}

ExperimentSpec spec_from_manifest(const nlohmann::json& manifest,
                                  const std::filesystem::path& output_dir) {
  if (!manifest.contains("config_text") || !manifest["config_text"].is_string()) {
    throw ConfigError("manifest has no config_text");
  }
  std::istringstream in(manifest["config_text"].get<std::string>());
  ExperimentSpec spec = validate_config(parse_config(in));
  spec.output_dir = output_dir;
  // The recorded text spells out every key; keep the original defaults list.
  if (manifest.contains("defaults") && manifest["defaults"].is_array()) {
    spec.defaulted = manifest["defaults"].get<std::vector<std::string>>();
  }
  return spec;
}

BootstrapArtifacts bootstrap(const RunConfig& cfg) {
  validate(cfg);
  TrafficConfig traffic = cfg.traffic;
  traffic.seed = cfg.seed;
  auto nodes = build_topology(traffic);
  const int plates = std::max(1, cfg.bootstrap_trials);
  auto trace = generate_triggers(nodes, traffic, plates);
  // Same delay stream as run(), so the bootstrap matches a full run's.
  auto rng = make_rng(cfg.seed, 3);
  std::vector<ScheduledTrigger> scheduled;
  for (const auto& e : trace.events) {
    scheduled.push_back(
        {e.node_id, e.trigger_tti, conventional_access_delay(rng, traffic.conventional_delay_range)});
  }
  Simulator sim(nodes, std::move(scheduled), cfg, traffic.plate_period(), plates);
  sim.set_reservations_enabled(false);
  while (!sim.done()) sim.step();
  auto samples = extract_samples(sim.log().accesses, nodes, cfg.sample_cfg);
  std::vector<NodeId> vocab;
  for (const Node& n : nodes) vocab.push_back(n.id);
  auto [model, plan] = epoch_step(samples, vocab, cfg.metric, cfg.static_cfg);
  return {std::move(nodes), std::move(trace), std::move(samples), std::move(model),
          std::move(plan)};
}

std::vector<ThresholdErrorPoint> threshold_analysis(const RunConfig& cfg,
                                                    std::span<const double> alphas) {
  const BootstrapArtifacts boot = bootstrap(cfg);
  const auto scores = max_feature_scores(boot.model, boot.samples, cfg.metric);
  return threshold_error_curve(scores, boot.nodes, alphas);
}

void write_threshold_csv(std::ostream& out, std::span<const ThresholdErrorPoint> curve,
                         const std::string& hash) {
  csv::write_hash_comment(out, hash);
  out << "alpha,interference_admit_rate,correlated_reject_rate\n";
  for (const auto& p : curve) {
    out << fmt(p.alpha) << ',' << fmt(p.interference_admit_rate) << ','
        << fmt(p.correlated_reject_rate) << '\n';
  }
}

}  // namespace dpre
