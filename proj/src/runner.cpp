#include "emdflow/runner.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace emdflow::runner {

TrackRun run_tracking(const synth::Scenario& sc, const trackers::TrackerSpec& spec,
                      double f1_threshold) {
  TrackRun run;
  run.steps = trackers::track_sequence(sc.measurements, sc.operators, sc.grid, spec);
  for (int s = 0; s < sc.steps(); ++s) {
    const Vec& truth = sc.true_states[s];
    run.rmse.push_back(metrics::rmse_relative(truth, run.steps[s].estimate));
    std::vector<int> support;
    for (Eigen::Index i = 0; i < truth.size(); ++i) {
      if (truth[i] > 0.0) support.push_back(static_cast<int>(i));
    }
    run.f1.push_back(metrics::f1_score(support, run.steps[s].estimate, f1_threshold));
    run.total_wall_s += run.steps[s].wall_time_s;
  }
  for (double r : run.rmse) run.mean_rmse += r;
  run.mean_rmse /= run.rmse.size();
  for (double f : run.f1) run.mean_f1 += f;
  run.mean_f1 /= run.f1.size();
  return run;
}

void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  if (jobs <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  const int workers = std::min(jobs, n);
  pool.reserve(workers);
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double get_param(const TrackerConfig& cfg, const std::string& name) {
  if (name == "lambda") return cfg.lambda;
  if (name == "gamma") return cfg.gamma;
  if (name == "mu") return cfg.mu;
  if (name == "xi") return cfg.xi;
  if (name == "beta") return cfg.beta;
  if (name == "eta") return cfg.eta;
  throw std::invalid_argument("unknown tracker parameter: " + name);
}

void set_param(TrackerConfig& cfg, const std::string& name, double value) {
  if (name == "lambda") cfg.lambda = value;
  else if (name == "gamma") cfg.gamma = value;
  else if (name == "mu") cfg.mu = value;
  else if (name == "xi") cfg.xi = value;
  else if (name == "beta") cfg.beta = value;
  else if (name == "eta") cfg.eta = value;
  else throw std::invalid_argument("unknown tracker parameter: " + name);
}

TrackerConfig direct_search(const std::function<double(const TrackerConfig&)>& objective,
                            TrackerConfig init, const std::vector<std::string>& params,
                            int rounds, double step_decades) {
  TrackerConfig best = init;
  double best_val = objective(best);
  double step = step_decades;
  for (int round = 0; round < rounds; ++round) {
    for (const auto& name : params) {
      for (const double sign : {+1.0, -1.0}) {
        TrackerConfig probe = best;
        set_param(probe, name, get_param(best, name) * std::pow(10.0, sign * step));
        const double val = objective(probe);
        if (val < best_val) {
          best_val = val;
          best = probe;
        }
      }
    }
    step /= 2.0;
  }
  return best;
}

std::uint64_t trial_seed(std::uint64_t base, int trial) {
  // splitmix64 of (base, trial) keeps per-trial streams well separated.
  std::uint64_t z = base + 0x9E3779B97F4A7C15ULL * static_cast<std::uint64_t>(trial + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace emdflow::runner
