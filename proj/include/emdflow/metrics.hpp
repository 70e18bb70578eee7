#pragma once

#include "emdflow/core.hpp"
#include "emdflow/spectral.hpp"
#include "emdflow/synth.hpp"

#include <utility>
#include <vector>

namespace emdflow::metrics {

/// ||truth - estimate||^2 / ||truth||^2. Throws on zero-norm truth.
double rmse_relative(const Vec& truth, const Vec& estimate);

struct DetectionOutcome {
  long tp = 0, fp = 0, fn = 0;
  double threshold = 0.0;
  double f1() const;
};

/// Marks element i detected iff estimate[i] > threshold.
DetectionOutcome detect(const std::vector<int>& truth_support, const Vec& estimate,
                        double threshold);
double f1_score(const std::vector<int>& truth_support, const Vec& estimate, double threshold);

/// sqrt(sum (a_i - b_i)^2 / N); compares two solutions of equal length.
double solution_rmse(const Vec& a, const Vec& b);

struct SpectralErrorConfig {
  int fine_bins = 1024;
  double band_lo = 0.0;
  double band_hi = 128.0;
  double mask_lo = 0.0, mask_hi = 0.0;  // exclusion interval, active when mask_hi > mask_lo
};

/// EMD between one normalized spectrum slice and the ground-truth line
/// spectrum, both deposited on the common fine grid (masses to nearest bin).
/// An empty side scores the full band width; two empty sides score zero.
double slice_emd_error(const std::vector<std::pair<double, double>>& truth_spikes,
                       const Vec& estimate_values, const Vec& estimate_axis,
                       const SpectralErrorConfig& cfg);

/// Per-sample sum of slice errors; each sample uses the latest causally
/// available window of the estimate.
double spectral_emd_error(const synth::FrequencyTrack& truth,
                          const spectral::TimeFrequencyEstimate& estimate,
                          const SpectralErrorConfig& cfg);

struct Summary {
  int n = 0;
  double mean = 0.0, stddev = 0.0;
  double median = 0.0, q25 = 0.0, q75 = 0.0;
  double min = 0.0, max = 0.0;
  double ci_lo = 0.0, ci_hi = 0.0;
  double alpha = 0.01;
};

/// Mean, quartiles, extremes, and a normal-approximation confidence interval.
Summary aggregate(const std::vector<double>& trials, double alpha = 0.01);

/// Inverse standard normal CDF (Acklam's rational approximation).
double inverse_normal_cdf(double p);

}  // namespace emdflow::metrics
