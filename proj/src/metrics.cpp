#include "emdflow/metrics.hpp"

#include "emdflow/transport.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emdflow::metrics {

double rmse_relative(const Vec& truth, const Vec& estimate) {
  if (truth.size() != estimate.size()) throw std::invalid_argument("rmse_relative: length mismatch");
  const double denom = truth.squaredNorm();
  if (denom <= 0.0) throw std::invalid_argument("rmse_relative: zero-norm truth");
  return (truth - estimate).squaredNorm() / denom;
}

double DetectionOutcome::f1() const {
  if (tp == 0 && fp == 0 && fn == 0) return 1.0;  // empty truth, no detections
  return 2.0 * tp / (2.0 * tp + fn + fp);
}

DetectionOutcome detect(const std::vector<int>& truth_support, const Vec& estimate,
                        double threshold) {
  if (!(threshold > 0.0)) throw std::invalid_argument("detect: threshold must be > 0");
  std::vector<char> truth(estimate.size(), 0);
  for (int i : truth_support) {
    if (i < 0 || i >= estimate.size()) throw std::out_of_range("detect: support index");
    truth[i] = 1;
  }
  DetectionOutcome out;
  out.threshold = threshold;
  for (Eigen::Index i = 0; i < estimate.size(); ++i) {
    const bool hit = estimate[i] > threshold;
    if (hit && truth[i]) ++out.tp;
    else if (hit) ++out.fp;
    else if (truth[i]) ++out.fn;
  }
  return out;
}

double f1_score(const std::vector<int>& truth_support, const Vec& estimate, double threshold) {
  return detect(truth_support, estimate, threshold).f1();
}

double solution_rmse(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) throw std::invalid_argument("solution_rmse: length mismatch");
  if (a.size() == 0) throw std::invalid_argument("solution_rmse: empty input");
  return std::sqrt((a - b).squaredNorm() / static_cast<double>(a.size()));
}

namespace {

constexpr double kEmptyMass = 1e-12;

void deposit(Vec& fine, double freq, double mass, const SpectralErrorConfig& cfg) {
  if (freq < cfg.band_lo || freq > cfg.band_hi || mass <= 0.0) return;
  const double width = (cfg.band_hi - cfg.band_lo) / cfg.fine_bins;
  int k = static_cast<int>((freq - cfg.band_lo) / width);
  k = std::clamp(k, 0, cfg.fine_bins - 1);
  fine[k] += mass;
}

void apply_mask(Vec& fine, const SpectralErrorConfig& cfg) {
  if (!(cfg.mask_hi > cfg.mask_lo)) return;
  const double width = (cfg.band_hi - cfg.band_lo) / cfg.fine_bins;
  for (int k = 0; k < cfg.fine_bins; ++k) {
    const double center = cfg.band_lo + (k + 0.5) * width;
    if (center >= cfg.mask_lo && center <= cfg.mask_hi) fine[k] = 0.0;
  }
}

}  // namespace

double slice_emd_error(const std::vector<std::pair<double, double>>& truth_spikes,
                       const Vec& estimate_values, const Vec& estimate_axis,
                       const SpectralErrorConfig& cfg) {
  if (estimate_values.size() != estimate_axis.size()) {
    throw std::invalid_argument("slice_emd_error: estimate axis mismatch");
  }
  if (cfg.fine_bins < 2 || !(cfg.band_hi > cfg.band_lo)) {
    throw std::invalid_argument("slice_emd_error: bad config");
  }
  Vec est = Vec::Zero(cfg.fine_bins);
  Vec tru = Vec::Zero(cfg.fine_bins);
  for (Eigen::Index j = 0; j < estimate_values.size(); ++j) {
    deposit(est, estimate_axis[j], estimate_values[j], cfg);
  }
  for (const auto& [freq, mass] : truth_spikes) deposit(tru, freq, mass, cfg);
  apply_mask(est, cfg);
  apply_mask(tru, cfg);

  const double me = est.sum(), mt = tru.sum();
  const bool est_empty = me <= kEmptyMass, tru_empty = mt <= kEmptyMass;
  if (est_empty && tru_empty) return 0.0;
  if (est_empty || tru_empty) return cfg.band_hi - cfg.band_lo;  // total miss
  est /= me;
  tru /= mt;
  const double width = (cfg.band_hi - cfg.band_lo) / cfg.fine_bins;
  return transport::emd_1d_oracle(est, tru, width);
}

double spectral_emd_error(const synth::FrequencyTrack& truth,
                          const spectral::TimeFrequencyEstimate& estimate,
                          const SpectralErrorConfig& cfg) {
  if (estimate.window_starts.empty()) throw std::invalid_argument("spectral_emd_error: empty estimate");
  const int m = estimate.window_length;
  const int first_end = estimate.window_starts.front() + m - 1;
  double total = 0.0;
  int w = 0;
  for (int t = first_end; t < truth.samples; ++t) {
    while (w + 1 < static_cast<int>(estimate.window_starts.size()) &&
           estimate.window_starts[w + 1] + m - 1 <= t) {
      ++w;
    }
    const Vec slice = estimate.magnitudes.row(w);
    total += slice_emd_error(truth.spectral_spikes(t), slice, estimate.freq_axis, cfg);
  }
  return total;
}

double inverse_normal_cdf(double p) {
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("inverse_normal_cdf: p in (0,1) required");
  // Acklam's rational approximation, |relative error| < 1.15e-9.
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                             -2.759285104469687e+02, 1.383577518672690e+02,
                             -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                             -1.556989798598866e+02, 6.680131188771972e+01,
                             -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                             -2.400758277161838e+00, -2.549732539343734e+00,
                             4.374664141464968e+00,  2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                             2.445134137142996e+00, 3.754408661907416e+00};
  const double plow = 0.02425, phigh = 1 - plow;
  double q, r;
  if (p < plow) {
    q = std::sqrt(-2 * std::log(p));
    return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  if (p > phigh) {
    q = std::sqrt(-2 * std::log(1 - p));
    return -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
           ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  }
  q = p - 0.5;
  r = q * q;
  return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
         (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
}

Summary aggregate(const std::vector<double>& trials, double alpha) {
  if (trials.empty()) throw std::invalid_argument("aggregate: empty input");
  Summary s;
  s.n = static_cast<int>(trials.size());
  s.alpha = alpha;
  std::vector<double> v = trials;
  std::sort(v.begin(), v.end());
  s.min = v.front();
  s.max = v.back();
  double sum = 0.0;
  for (double x : v) sum += x;
  s.mean = sum / s.n;
  double ss = 0.0;
  for (double x : v) ss += (x - s.mean) * (x - s.mean);
  s.stddev = s.n > 1 ? std::sqrt(ss / (s.n - 1)) : 0.0;

  auto quantile = [&](double p) {
    const double pos = p * (s.n - 1);
    const int lo = static_cast<int>(pos);
    const int hi = std::min(lo + 1, s.n - 1);
    const double frac = pos - lo;
    return v[lo] * (1.0 - frac) + v[hi] * frac;
  };
  s.median = quantile(0.5);
  s.q25 = quantile(0.25);
  s.q75 = quantile(0.75);

  const double z = inverse_normal_cdf(1.0 - alpha / 2.0);
  const double half = z * s.stddev / std::sqrt(static_cast<double>(s.n));
  s.ci_lo = s.mean - half;
  s.ci_hi = s.mean + half;
  return s;
}

}  // namespace emdflow::metrics
