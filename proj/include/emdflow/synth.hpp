#pragma once

#include "emdflow/core.hpp"

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace emdflow::synth {

/// Deterministic random source: a fully specified engine with hand-rolled
/// transforms, so sequences are identical across platforms and runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  double uniform() {  // [0, 1)
    return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
  }

  double gaussian() {  // Box-Muller with cached second draw
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    const double u1 = 1.0 - uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * M_PI * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  int uniform_int(int n) {  // [0, n), rejection sampled
    const std::uint64_t bound = UINT64_MAX - UINT64_MAX % static_cast<std::uint64_t>(n);
    std::uint64_t r;
    do {
      r = eng_();
    } while (r >= bound);
    return static_cast<int>(r % static_cast<std::uint64_t>(n));
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

/// K unit targets performing reflected random walks; `speed` moves per step.
std::vector<Vec> gen_target_walk(const GridGeometry& grid, int targets, int steps, int speed,
                                 std::uint64_t seed);

/// i.i.d. N(0, 1/M) sensing matrix, row-major fill order.
Mat gen_gaussian_sensing(int rows, int cols, std::uint64_t seed);

/// Adds i.i.d. N(0, sigma^2) noise.
Vec add_noise(const Vec& samples, double sigma, std::uint64_t seed);

struct FreqSegment {
  int start = 0;  // first sample of the segment
  double freq = 0.0;
  double phase = 0.0;  // cos(2 pi f t + phase), t in seconds
};

struct FrequencyComponent {
  double amplitude = 0.0;
  std::vector<FreqSegment> segments;
  const FreqSegment& segment_at(int t) const;
  double freq_at(int t) const { return segment_at(t).freq; }
};

enum class TrackModel { tones, theta_gamma };

/// Piecewise-constant ground-truth frequency content of a synthetic signal.
struct FrequencyTrack {
  TrackModel model = TrackModel::tones;
  double fs = 0.0;
  int samples = 0;
  double band_lo = 0.0, band_hi = 0.0;
  double mu_t = 0.0, sigma_t = 0.0, sigma_f = 0.0;
  std::vector<FrequencyComponent> components;

  /// Instantaneous line spectrum (frequency, mass) at sample t. For the
  /// theta-gamma model the modulation product is expanded into the carrier
  /// and its two sidebands.
  std::vector<std::pair<double, double>> spectral_spikes(int t) const;
};

/// Sum of K sinusoids whose frequencies jump every ~mu_t samples by N(0, sigma_f),
/// rejected outside [band_lo, band_hi]; phase continuous at every change point.
/// Returns clean samples; add measurement noise via add_noise.
std::pair<Vec, FrequencyTrack> gen_freq_signal(double fs, int components, double mu_t,
                                               double sigma_t, double sigma_f, double band_lo,
                                               double band_hi, double duration_s,
                                               std::uint64_t seed);

/// Theta-modulated gamma model: a_th cos(th) * (1 + a_ga cos(ga)) + noise.
/// Frequencies drift every change_ms milliseconds within 4-7 Hz and 30-80 Hz.
std::pair<Vec, FrequencyTrack> gen_theta_gamma(double fs, double a_theta, double a_gamma,
                                               double drift_theta, double drift_gamma,
                                               double change_ms, double duration_s, double sigma,
                                               std::uint64_t seed);

/// A generated target-tracking experiment: true states, sensing operator(s),
/// and noisy measurements y_n = A x_n + sigma eps_n.
struct Scenario {
  GridGeometry grid{std::vector<int>{1}};
  std::vector<Vec> true_states;
  std::vector<Mat> operators;  // one shared operator or one per step
  std::vector<Vec> measurements;
  double sigma = 0.0;
  std::uint64_t seed = 0;
  int targets = 0;
  int measurement_rows = 0;
  int speed = 1;

  int steps() const { return static_cast<int>(true_states.size()); }
  const Mat& op(int step) const { return operators.size() == 1 ? operators[0] : operators.at(step); }
};

Scenario gen_tracking_scenario(const GridGeometry& grid, int targets, int measurement_rows,
                               double sigma, int speed, int steps, std::uint64_t seed);

}  // namespace emdflow::synth
