#include "emdflow/io.hpp"
#include "emdflow/metrics.hpp"
#include "emdflow/runner.hpp"
#include "emdflow/spectral.hpp"
#include "emdflow/synth.hpp"
#include "emdflow/trackers.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>

namespace fs = std::filesystem;
using namespace emdflow;
using io::json;

namespace {

int log_level() {
  const char* env = std::getenv("EMDFLOW_LOG");
  if (!env) return 0;
  const std::string v(env);
  if (v == "debug") return 2;
  if (v == "info") return 1;
  return 0;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[emdflow] " << msg << "\n";
}

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json load_config(const std::string& path) {
  try {
    return json::parse(io::read_text(path));
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("config: ") + ex.what());
  }
}

double get_or(const json& j, const std::string& key, double fallback) {
  return j.contains(key) ? j.at(key).get<double>() : fallback;
}

int get_or(const json& j, const std::string& key, int fallback) {
  return j.contains(key) ? j.at(key).get<int>() : fallback;
}

std::string get_or(const json& j, const std::string& key, const std::string& fallback) {
  return j.contains(key) ? j.at(key).get<std::string>() : fallback;
}

trackers::TrackerSpec parse_tracker(const json& j) {
  io::validate_keys(j, {"algorithm", "backend", "lambda", "gamma", "mu", "xi", "beta", "eta", "q",
                        "rwl1_iters", "dynamics", "primal_tol", "dual_tol", "max_iters"},
                    "tracker");
  trackers::TrackerSpec spec;
  spec.alg = trackers::algorithm_from_string(get_or(j, "algorithm", std::string("bpdn")));
  const std::string backend = get_or(j, "backend", std::string("beckmann"));
  if (backend == "general") spec.backend = trackers::EmdBackend::general;
  else if (backend == "beckmann") spec.backend = trackers::EmdBackend::beckmann;
  else throw ConfigError("tracker: unknown backend \"" + backend + "\"");

  spec.cfg.lambda = get_or(j, "lambda", spec.cfg.lambda);
  spec.cfg.gamma = get_or(j, "gamma", spec.cfg.gamma);
  spec.cfg.mu = j.contains("mu") ? j.at("mu").get<double>() : 0.1 * spec.cfg.lambda;
  spec.cfg.xi = get_or(j, "xi", spec.cfg.xi);
  spec.cfg.beta = get_or(j, "beta", spec.cfg.beta);
  spec.cfg.eta = get_or(j, "eta", spec.cfg.eta);
  spec.cfg.q = get_or(j, "q", spec.cfg.q);
  spec.cfg.rwl1_iters = get_or(j, "rwl1_iters", spec.cfg.rwl1_iters);
  spec.cfg.primal_tol = get_or(j, "primal_tol", spec.cfg.primal_tol);
  spec.cfg.dual_tol = get_or(j, "dual_tol", spec.cfg.dual_tol);
  spec.cfg.max_iters = get_or(j, "max_iters", spec.cfg.max_iters);

  const std::string dyn = get_or(j, "dynamics", std::string("identity"));
  if (dyn == "identity") spec.dynamics = trackers::DynamicsModel::identity();
  else if (dyn == "top_q") spec.dynamics = trackers::DynamicsModel::top_q(spec.cfg.q);
  else if (dyn == "blur") spec.dynamics = trackers::DynamicsModel::blur3();
  else if (dyn == "top_q_blur") spec.dynamics = trackers::DynamicsModel::top_q_blur(spec.cfg.q);
  else throw ConfigError("tracker: unknown dynamics \"" + dyn + "\"");

  try {
    spec.cfg.validate();
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("tracker: ") + ex.what());
  }
  return spec;
}

json tracker_echo(const trackers::TrackerSpec& spec) {
  json j;
  j["algorithm"] = trackers::to_string(spec.alg);
  j["backend"] = spec.backend == trackers::EmdBackend::general ? "general" : "beckmann";
  j["lambda"] = spec.cfg.lambda;
  j["gamma"] = spec.cfg.gamma;
  j["mu"] = spec.cfg.mu;
  j["xi"] = spec.cfg.xi;
  j["beta"] = spec.cfg.beta;
  j["eta"] = spec.cfg.eta;
  j["q"] = spec.cfg.q;
  j["rwl1_iters"] = spec.cfg.rwl1_iters;
  return j;
}

int round_to_int(double x) { return static_cast<int>(std::lround(x)); }

// ---------------------------------------------------------------------------
// gen

int cmd_gen(const json& config, std::optional<std::uint64_t> seed_override,
            const fs::path& out_dir) {
  io::validate_keys(config,
                    {"version", "kind", "seed", "dims", "k", "k_frac", "m", "m_frac", "sigma",
                     "sigma2", "speed", "steps", "fs", "components", "mu_t", "sigma_t", "sigma_f",
                     "band", "duration_s", "a_theta", "a_gamma", "drift_theta", "drift_gamma",
                     "change_ms"},
                    "gen");
  json cfg = config;
  if (seed_override) cfg["seed"] = *seed_override;
  const std::uint64_t seed = cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : 1;
  const std::string kind = get_or(cfg, "kind", std::string("target_walk"));
  const std::string hash = io::config_hash(cfg);
  fs::create_directories(out_dir);

  if (kind == "target_walk") {
    std::vector<int> dims = cfg.contains("dims") ? cfg.at("dims").get<std::vector<int>>()
                                                 : std::vector<int>{32, 32};
    const GridGeometry grid(dims);
    const int n = grid.size();
    const int k = cfg.contains("k") ? cfg.at("k").get<int>()
                                    : round_to_int(get_or(cfg, "k_frac", 0.05) * n);
    const int m = cfg.contains("m") ? cfg.at("m").get<int>()
                                    : round_to_int(get_or(cfg, "m_frac", 0.2) * n);
    double sigma = 0.0;
    if (cfg.contains("sigma") && cfg.contains("sigma2")) {
      throw ConfigError("gen: give either \"sigma\" or \"sigma2\", not both");
    }
    if (cfg.contains("sigma")) sigma = cfg.at("sigma").get<double>();
    else sigma = std::sqrt(get_or(cfg, "sigma2", 0.001));
    const int speed = get_or(cfg, "speed", 1);
    const int steps = get_or(cfg, "steps", 25);
    const auto sc = synth::gen_tracking_scenario(grid, k, m, sigma, speed, steps, seed);
    io::write_scenario(out_dir / "scenario.json", sc, hash);
  } else if (kind == "freq") {
    const double fs_hz = get_or(cfg, "fs", 256.0);
    std::vector<double> band = cfg.contains("band") ? cfg.at("band").get<std::vector<double>>()
                                                    : std::vector<double>{0.0, 128.0};
    if (band.size() != 2) throw ConfigError("gen: band must be [lo, hi]");
    const double sigma = get_or(cfg, "sigma", 0.0);
    auto [clean, track] =
        synth::gen_freq_signal(fs_hz, get_or(cfg, "components", 3), get_or(cfg, "mu_t", 40.0),
                               get_or(cfg, "sigma_t", 0.0), get_or(cfg, "sigma_f", 4.0), band[0],
                               band[1], get_or(cfg, "duration_s", 1.5), seed);
    io::SpectralScenario sc;
    sc.samples = synth::add_noise(clean, sigma, seed ^ 0x5DEECE66DULL);
    sc.track = track;
    sc.sigma = sigma;
    sc.seed = seed;
    io::write_spectral_scenario(out_dir / "scenario.json", sc, hash);
  } else if (kind == "theta_gamma") {
    auto [samples, track] = synth::gen_theta_gamma(
        get_or(cfg, "fs", 256.0), get_or(cfg, "a_theta", 1.0), get_or(cfg, "a_gamma", 0.2),
        get_or(cfg, "drift_theta", 0.5), get_or(cfg, "drift_gamma", 6.0),
        get_or(cfg, "change_ms", 150.0), get_or(cfg, "duration_s", 1.5),
        get_or(cfg, "sigma", 0.0), seed);
    io::SpectralScenario sc;
    sc.samples = samples;
    sc.track = track;
    sc.sigma = get_or(cfg, "sigma", 0.0);
    sc.seed = seed;
    io::write_spectral_scenario(out_dir / "scenario.json", sc, hash);
  } else {
    throw ConfigError("gen: unknown kind \"" + kind + "\"");
  }
  log_info("gen: wrote " + (out_dir / "scenario.json").string());
  return 0;
}

// ---------------------------------------------------------------------------
// track

int cmd_track(const json& config, const fs::path& out_dir) {
  io::validate_keys(config, {"version", "scenario", "tracker", "f1_threshold"}, "track");
  if (!config.contains("scenario")) throw ConfigError("track: missing key \"scenario\"");
  if (!config.contains("tracker")) throw ConfigError("track: missing key \"tracker\"");
  const auto spec = parse_tracker(config.at("tracker"));
  const double f1_threshold = get_or(config, "f1_threshold", 0.1);
  const std::string hash = io::config_hash(config);

  synth::Scenario sc;
  try {
    sc = io::read_scenario(config.at("scenario").get<std::string>());
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("track: scenario: ") + ex.what());
  }
  fs::create_directories(out_dir);

  const auto run = runner::run_tracking(sc, spec, f1_threshold);

  json rec;
  rec["version"] = 1;
  rec["config_hash"] = hash;
  rec["seed"] = sc.seed;
  rec["tracker"] = tracker_echo(spec);
  std::vector<double> flat;
  json statuses = json::array(), flows = json::array(), iters = json::array();
  for (const auto& step : run.steps) {
    for (Eigen::Index i = 0; i < step.estimate.size(); ++i) flat.push_back(step.estimate[i]);
    statuses.push_back(step.solver.status.empty() ? "n/a" : step.solver.status);
    flows.push_back(step.total_flow);
    iters.push_back(step.solver.iterations);
  }
  rec["estimates"] = io::base64_encode(flat.data(), flat.size());
  rec["solver_statuses"] = statuses;
  rec["total_flows"] = flows;
  rec["solver_iterations"] = iters;
  io::write_text(out_dir / "run.json", rec.dump(2) + "\n");

  std::ostringstream metrics_csv;
  metrics_csv << "# config_hash=" << hash << " seed=" << sc.seed << "\n";
  metrics_csv << "step,rmse,f1\n";
  for (size_t s = 0; s < run.rmse.size(); ++s) {
    metrics_csv << s << "," << io::fmt_double(run.rmse[s]) << "," << io::fmt_double(run.f1[s])
                << "\n";
  }
  io::write_text(out_dir / "metrics.csv", metrics_csv.str());

  std::ostringstream timings_csv;
  timings_csv << "# config_hash=" << hash << " seed=" << sc.seed << "\n";
  timings_csv << "step,wall_time_s,solver_status,solver_iterations\n";
  for (size_t s = 0; s < run.steps.size(); ++s) {
    timings_csv << s << "," << io::fmt_double(run.steps[s].wall_time_s) << ","
                << (run.steps[s].solver.status.empty() ? "n/a" : run.steps[s].solver.status)
                << "," << run.steps[s].solver.iterations << "\n";
  }
  io::write_text(out_dir / "timings.csv", timings_csv.str());
  log_info("track: wrote " + (out_dir / "metrics.csv").string());
  return 0;
}

// ---------------------------------------------------------------------------
// eval

int cmd_eval(const json& config, const fs::path& out_dir) {
  io::validate_keys(config, {"version", "run", "scenario", "alpha", "f1_threshold"}, "eval");
  if (!config.contains("run") || !config.contains("scenario")) {
    throw ConfigError("eval: need \"run\" and \"scenario\" paths");
  }
  const double alpha = get_or(config, "alpha", 0.01);
  const double f1_threshold = get_or(config, "f1_threshold", 0.1);
  const std::string hash = io::config_hash(config);

  synth::Scenario sc;
  json rec;
  try {
    sc = io::read_scenario(config.at("scenario").get<std::string>());
    rec = json::parse(io::read_text(config.at("run").get<std::string>()));
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("eval: ") + ex.what());
  }
  const Vec flat = io::decode_vec(rec.at("estimates").get<std::string>());
  const int n = sc.grid.size();
  if (flat.size() != static_cast<Eigen::Index>(n) * sc.steps()) {
    throw ConfigError("eval: estimate payload does not match the scenario");
  }

  std::vector<double> rmse, f1;
  for (int s = 0; s < sc.steps(); ++s) {
    const Vec est = flat.segment(static_cast<Eigen::Index>(s) * n, n);
    rmse.push_back(metrics::rmse_relative(sc.true_states[s], est));
    std::vector<int> support;
    for (int i = 0; i < n; ++i) {
      if (sc.true_states[s][i] > 0.0) support.push_back(i);
    }
    f1.push_back(metrics::f1_score(support, est, f1_threshold));
  }
  const auto rmse_sum = metrics::aggregate(rmse, alpha);
  const auto f1_sum = metrics::aggregate(f1, alpha);

  fs::create_directories(out_dir);
  auto to_json = [](const metrics::Summary& s) {
    json j;
    j["n"] = s.n;
    j["mean"] = s.mean;
    j["stddev"] = s.stddev;
    j["median"] = s.median;
    j["q25"] = s.q25;
    j["q75"] = s.q75;
    j["min"] = s.min;
    j["max"] = s.max;
    j["ci_lo"] = s.ci_lo;
    j["ci_hi"] = s.ci_hi;
    j["alpha"] = s.alpha;
    return j;
  };
  json out;
  out["version"] = 1;
  out["config_hash"] = hash;
  out["rmse"] = to_json(rmse_sum);
  out["f1"] = to_json(f1_sum);
  io::write_text(out_dir / "summary.json", out.dump(2) + "\n");

  std::ostringstream csv;
  csv << "# config_hash=" << hash << " seed=" << sc.seed << "\n";
  csv << "metric,n,mean,stddev,median,q25,q75,min,max,ci_lo,ci_hi\n";
  for (const auto& [name, s] : {std::pair<const char*, metrics::Summary>{"rmse", rmse_sum},
                                {"f1", f1_sum}}) {
    csv << name << "," << s.n << "," << io::fmt_double(s.mean) << "," << io::fmt_double(s.stddev)
        << "," << io::fmt_double(s.median) << "," << io::fmt_double(s.q25) << ","
        << io::fmt_double(s.q75) << "," << io::fmt_double(s.min) << "," << io::fmt_double(s.max)
        << "," << io::fmt_double(s.ci_lo) << "," << io::fmt_double(s.ci_hi) << "\n";
  }
  io::write_text(out_dir / "summary.csv", csv.str());
  log_info("eval: wrote " + (out_dir / "summary.csv").string());
  return 0;
}

// ---------------------------------------------------------------------------
// bench

int cmd_bench(const json& config, std::optional<std::uint64_t> seed_override,
              std::optional<int> trials_override, int jobs, const fs::path& out_dir) {
  io::validate_keys(config,
                    {"version", "sizes", "sparsity", "m_frac", "sigma2", "repeats", "steps",
                     "tracker", "seed"},
                    "bench");
  json cfg = config;
  if (seed_override) cfg["seed"] = *seed_override;
  if (trials_override) cfg["repeats"] = *trials_override;
  const std::uint64_t seed = cfg.contains("seed") ? cfg.at("seed").get<std::uint64_t>() : 1;
  const double sparsity = get_or(cfg, "sparsity", 0.05);
  const double m_frac = get_or(cfg, "m_frac", 0.2);
  const double sigma = std::sqrt(get_or(cfg, "sigma2", 0.001));
  const int repeats = get_or(cfg, "repeats", 10);
  const int steps = get_or(cfg, "steps", 3);
  auto base_spec = cfg.contains("tracker") ? parse_tracker(cfg.at("tracker"))
                                           : trackers::TrackerSpec{};
  base_spec.alg = trackers::Algorithm::emd_df_nonneg;
  std::vector<std::vector<int>> sizes =
      cfg.contains("sizes") ? cfg.at("sizes").get<std::vector<std::vector<int>>>()
                            : std::vector<std::vector<int>>{{12, 12}, {20, 20}, {28, 28}};
  const std::string hash = io::config_hash(cfg);
  fs::create_directories(out_dir);

  struct Row {
    std::string size;
    int n = 0, repeat = 0;
    double runtime_general = 0, runtime_beckmann = 0, rmse = 0;
  };
  std::vector<Row> rows;
  std::ostringstream summary;
  summary << "# config_hash=" << hash << " seed=" << seed << "\n";
  summary << "size,n,backend,mean_step_runtime_s,std_step_runtime_s,mean_solution_rmse\n";

  for (size_t si = 0; si < sizes.size(); ++si) {
    if (sizes[si].size() != 2) throw ConfigError("bench: each size must be [rows, cols]");
    const GridGeometry grid(sizes[si]);
    const int n = grid.size();
    const int k = std::max(1, round_to_int(sparsity * n));
    const int m = std::max(1, round_to_int(m_frac * n));
    std::vector<Row> size_rows(repeats);
    runner::parallel_for(repeats, jobs, [&](int r) {
      const auto sc = synth::gen_tracking_scenario(
          grid, k, m, sigma, 1, steps, runner::trial_seed(seed, static_cast<int>(si) * 1000 + r));
      auto spec = base_spec;
      spec.backend = trackers::EmdBackend::general;
      const auto run_g = runner::run_tracking(sc, spec);
      spec.backend = trackers::EmdBackend::beckmann;
      const auto run_b = runner::run_tracking(sc, spec);
      double rmse = 0.0;
      for (int s = 0; s < steps; ++s) {
        rmse += metrics::solution_rmse(run_g.steps[s].estimate, run_b.steps[s].estimate);
      }
      Row row;
      row.size = std::to_string(sizes[si][0]) + "x" + std::to_string(sizes[si][1]);
      row.n = n;
      row.repeat = r;
      row.runtime_general = run_g.total_wall_s / steps;
      row.runtime_beckmann = run_b.total_wall_s / steps;
      row.rmse = rmse / steps;
      size_rows[r] = row;
    });
    rows.insert(rows.end(), size_rows.begin(), size_rows.end());

    for (const char* backend : {"general", "beckmann"}) {
      std::vector<double> times;
      double rmse_mean = 0.0;
      for (const auto& row : size_rows) {
        times.push_back(std::string(backend) == "general" ? row.runtime_general
                                                          : row.runtime_beckmann);
        rmse_mean += row.rmse;
      }
      const auto agg = metrics::aggregate(times);
      summary << size_rows[0].size << "," << n << "," << backend << ","
              << io::fmt_double(agg.mean) << "," << io::fmt_double(agg.stddev) << ","
              << io::fmt_double(rmse_mean / size_rows.size()) << "\n";
    }
    log_info("bench: finished size " + std::to_string(n));
  }

  std::ostringstream csv;
  csv << "# config_hash=" << hash << " seed=" << seed << "\n";
  csv << "size,n,repeat,step_runtime_general_s,step_runtime_beckmann_s,solution_rmse\n";
  for (const auto& row : rows) {
    csv << row.size << "," << row.n << "," << row.repeat << ","
        << io::fmt_double(row.runtime_general) << "," << io::fmt_double(row.runtime_beckmann)
        << "," << io::fmt_double(row.rmse) << "\n";
  }
  io::write_text(out_dir / "bench.csv", csv.str());
  io::write_text(out_dir / "bench_summary.csv", summary.str());
  return 0;
}

// ---------------------------------------------------------------------------
// tf

void write_tf_csv(const fs::path& path, const spectral::TimeFrequencyEstimate& tf,
                  const std::string& hash, std::uint64_t seed) {
  std::ostringstream csv;
  csv << "# config_hash=" << hash << " seed=" << seed << "\n";
  csv << "# axis_hz=";
  for (Eigen::Index k = 0; k < tf.freq_axis.size(); ++k) {
    csv << (k ? "," : "") << io::fmt_double(tf.freq_axis[k]);
  }
  csv << "\nwindow_start,magnitudes...\n";
  for (int w = 0; w < tf.magnitudes.rows(); ++w) {
    csv << tf.window_starts[w];
    for (int k = 0; k < tf.magnitudes.cols(); ++k) {
      csv << "," << io::fmt_double(tf.magnitudes(w, k));
    }
    csv << "\n";
  }
  io::write_text(path, csv.str());
}

int cmd_tf(const json& config, const fs::path& out_dir) {
  io::validate_keys(config,
                    {"version", "signal", "scenario", "window", "oversampling", "hop", "tracker",
                     "algorithm"},
                    "tf");
  const int window = get_or(config, "window", 72);
  const double oversampling = get_or(config, "oversampling", 5.0);
  const int hop = get_or(config, "hop", window / 2);
  const std::string hash = io::config_hash(config);

  Vec samples;
  double fs_hz = 0.0;
  std::uint64_t seed = 0;
  try {
    if (config.contains("signal")) {
      std::tie(samples, fs_hz) = io::read_signal_csv(config.at("signal").get<std::string>());
    } else if (config.contains("scenario")) {
      const auto sc = io::read_spectral_scenario(config.at("scenario").get<std::string>());
      samples = sc.samples;
      fs_hz = sc.track.fs;
      seed = sc.seed;
    } else {
      throw ConfigError("tf: need \"signal\" or \"scenario\"");
    }
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& ex) {
    throw ConfigError(std::string("tf: ") + ex.what());
  }
  if (samples.size() < window) throw ConfigError("tf: signal shorter than the analysis window");

  spectral::SpectralConfig scfg;
  scfg.hop = hop;
  if (config.contains("tracker")) {
    const auto spec = parse_tracker(config.at("tracker"));
    scfg.tracker = spec.cfg;
    scfg.dynamics = spec.dynamics;
    scfg.backend = spec.backend;
  } else {
    scfg.tracker.lambda = 0.05;
    scfg.tracker.gamma = 0.02;
    scfg.tracker.mu = 0.005;
    scfg.tracker.q = 2;
    scfg.dynamics = trackers::DynamicsModel::top_q(2);
  }
  const auto alg =
      spectral::spectral_tracker_from_string(get_or(config, "algorithm", std::string("emd-df")));

  const auto dict = spectral::build_dictionary(window, oversampling);
  fs::create_directories(out_dir);
  const auto tf = spectral::track_spectrum(samples, dict, alg, scfg, fs_hz);
  write_tf_csv(out_dir / "emddf_tf.csv", tf, hash, seed);
  const auto stft = spectral::stft_baseline(samples, window, hop, fs_hz);
  write_tf_csv(out_dir / "stft_tf.csv", stft, hash, seed);

  json meta;
  meta["version"] = 1;
  meta["config_hash"] = hash;
  meta["fs"] = fs_hz;
  meta["window"] = window;
  meta["oversampling"] = oversampling;
  meta["hop"] = hop;
  meta["emddf_bins"] = dict.reported_bins();
  meta["stft_bins"] = window;
  io::write_text(out_dir / "tf_meta.json", meta.dump(2) + "\n");
  log_info("tf: wrote " + (out_dir / "emddf_tf.csv").string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"EMD-regularized causal tracking of sparse signals"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".";
  std::optional<std::uint64_t> seed;
  std::optional<int> trials;
  int jobs = 1;

  auto add_common = [&](CLI::App* sub, bool with_seed, bool with_pool) {
    sub->add_option("--config", config_path, "JSON config path")->required();
    sub->add_option("--out", out_dir, "output directory");
    if (with_seed) sub->add_option("--seed", seed, "seed override");
    if (with_pool) {
      sub->add_option("--trials", trials, "repeat-count override");
      sub->add_option("--jobs", jobs, "worker pool size");
    }
    return sub;
  };

  auto* gen = add_common(app.add_subcommand("gen", "generate a scenario file"), true, false);
  auto* track = add_common(app.add_subcommand("track", "run a tracker over a scenario"), false,
                           false);
  auto* eval = add_common(app.add_subcommand("eval", "summarize a run record"), false, false);
  auto* bench =
      add_common(app.add_subcommand("bench", "state-size scaling benchmark"), true, true);
  auto* tf = add_common(app.add_subcommand("tf", "time-frequency analysis of a 1-D signal"),
                        false, false);

  CLI11_PARSE(app, argc, argv);

  try {
    const json config = load_config(config_path);
    if (gen->parsed()) return cmd_gen(config, seed, out_dir);
    if (track->parsed()) return cmd_track(config, out_dir);
    if (eval->parsed()) return cmd_eval(config, out_dir);
    if (bench->parsed()) return cmd_bench(config, seed, trials, jobs, out_dir);
    if (tf->parsed()) return cmd_tf(config, out_dir);
  } catch (const ConfigError& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& ex) {
    std::cerr << "error: " << ex.what() << "\n";
    return 1;
  } catch (const std::exception& ex) {
    std::cerr << "runtime error: " << ex.what() << "\n";
    return 2;
  }
  return 0;
}
