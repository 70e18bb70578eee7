#pragma once

#include "emdflow/core.hpp"
#include "emdflow/metrics.hpp"
#include "emdflow/synth.hpp"
#include "emdflow/trackers.hpp"

#include <functional>
#include <string>
#include <vector>

namespace emdflow::runner {

/// One tracked run over a scenario with per-step quality metrics.
struct TrackRun {
  std::vector<trackers::StepRecord> steps;
  std::vector<double> rmse;
  std::vector<double> f1;
  double mean_rmse = 0.0;
  double mean_f1 = 0.0;
  double total_wall_s = 0.0;
};

TrackRun run_tracking(const synth::Scenario& sc, const trackers::TrackerSpec& spec,
                      double f1_threshold = 0.1);

/// Bounded worker pool over [0, n); results must be written by index so the
/// output is independent of scheduling.
void parallel_for(int n, int jobs, const std::function<void(int)>& fn);

/// Pattern search over log10 of the named TrackerConfig fields, minimizing
/// the supplied objective. Deterministic: fixed probe order, halved steps.
TrackerConfig direct_search(const std::function<double(const TrackerConfig&)>& objective,
                            TrackerConfig init, const std::vector<std::string>& params,
                            int rounds = 2, double step_decades = 0.5);

double get_param(const TrackerConfig& cfg, const std::string& name);
void set_param(TrackerConfig& cfg, const std::string& name, double value);

/// Trial seed derivation: disjoint per-trial streams from one base seed.
std::uint64_t trial_seed(std::uint64_t base, int trial);

}  // namespace emdflow::runner
