#include "emdflow/synth.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace emdflow::synth {

namespace {

/// One reflected unit move on the grid: a uniformly chosen axis direction;
/// moves that would leave the grid bounce back to the origin cell.
int reflected_move(const GridGeometry& grid, int cell, Rng& rng) {
  const int d = grid.ndim();
  const int choice = rng.uniform_int(2 * d);
  const int axis = choice / 2;
  const int dir = (choice % 2 == 0) ? 1 : -1;
  std::vector<int> idx = grid.unflatten(cell);
  idx[axis] += dir;
  if (idx[axis] < 0 || idx[axis] >= grid.dims()[axis]) return cell;
  return grid.flatten(idx);
}

Vec state_from_positions(const std::vector<int>& pos, int n) {
  Vec s = Vec::Zero(n);
  for (int p : pos) s[p] += 1.0;
  return s;
}

}  // namespace

std::vector<Vec> gen_target_walk(const GridGeometry& grid, int targets, int steps, int speed,
                                 std::uint64_t seed) {
  const int n = grid.size();
  if (targets > n) throw std::invalid_argument("gen_target_walk: more targets than cells");
  if (targets < 0 || steps < 1 || speed < 0) {
    throw std::invalid_argument("gen_target_walk: bad parameters");
  }
  Rng rng(seed);
  // Initial placement on distinct cells.
  std::vector<int> pos;
  std::vector<char> used(n, 0);
  while (static_cast<int>(pos.size()) < targets) {
    const int c = rng.uniform_int(n);
    if (!used[c]) {
      used[c] = 1;
      pos.push_back(c);
    }
  }
  std::vector<Vec> states;
  states.reserve(steps);
  states.push_back(state_from_positions(pos, n));
  for (int s = 1; s < steps; ++s) {
    for (auto& p : pos) {
      for (int mv = 0; mv < speed; ++mv) p = reflected_move(grid, p, rng);
    }
    states.push_back(state_from_positions(pos, n));
  }
  return states;
}

Mat gen_gaussian_sensing(int rows, int cols, std::uint64_t seed) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("gen_gaussian_sensing: bad shape");
  Rng rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rows));
  Mat a(rows, cols);
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) a(i, j) = scale * rng.gaussian();
  }
  return a;
}

Vec add_noise(const Vec& samples, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) throw std::invalid_argument("add_noise: sigma must be >= 0");
  if (sigma == 0.0) return samples;
  Rng rng(seed);
  Vec out = samples;
  for (Eigen::Index i = 0; i < out.size(); ++i) out[i] += sigma * rng.gaussian();
  return out;
}

const FreqSegment& FrequencyComponent::segment_at(int t) const {
  if (segments.empty()) throw std::logic_error("FrequencyComponent: no segments");
  size_t lo = 0;
  for (size_t s = 1; s < segments.size() && segments[s].start <= t; ++s) lo = s;
  return segments[lo];
}

std::vector<std::pair<double, double>> FrequencyTrack::spectral_spikes(int t) const {
  std::vector<std::pair<double, double>> spikes;
  if (model == TrackModel::tones) {
    for (const auto& c : components) spikes.emplace_back(c.freq_at(t), c.amplitude);
    return spikes;
  }
  // theta_gamma: carrier plus the two modulation sidebands.
  const double f_th = components[0].freq_at(t);
  const double a_th = components[0].amplitude;
  const double f_ga = components[1].freq_at(t);
  const double a_ga = components[1].amplitude;
  spikes.emplace_back(f_th, a_th);
  spikes.emplace_back(f_ga - f_th, a_th * a_ga / 2.0);
  spikes.emplace_back(f_ga + f_th, a_th * a_ga / 2.0);
  return spikes;
}

namespace {

/// Appends a phase-continuous segment: the cosine argument matches at the
/// change sample, 2 pi f0 t + p0 = 2 pi f1 t + p1 at t = start / fs.
void push_continuous(std::vector<FreqSegment>& segs, int start, double freq, double fs) {
  const auto& prev = segs.back();
  const double t = start / fs;
  double phase = prev.phase + 2.0 * M_PI * (prev.freq - freq) * t;
  phase = std::remainder(phase, 2.0 * M_PI);
  segs.push_back(FreqSegment{start, freq, phase});
}

int draw_interval(Rng& rng, double mu_t, double sigma_t) {
  const double raw = mu_t + sigma_t * (sigma_t > 0.0 ? rng.gaussian() : 0.0);
  return std::max(1, static_cast<int>(std::lround(raw)));
}

double draw_banded_freq(Rng& rng, double current, double sigma_f, double lo, double hi) {
  // Redraw until the proposed jump lands inside the band.
  for (;;) {
    const double next = current + sigma_f * rng.gaussian();
    if (next >= lo && next <= hi) return next;
  }
}

}  // namespace

std::pair<Vec, FrequencyTrack> gen_freq_signal(double fs, int components, double mu_t,
                                               double sigma_t, double sigma_f, double band_lo,
                                               double band_hi, double duration_s,
                                               std::uint64_t seed) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("gen_freq_signal: non-positive duration");
  if (components < 1) throw std::invalid_argument("gen_freq_signal: need at least one component");
  if (!(band_lo >= 0.0 && band_hi > band_lo && band_hi <= fs / 2.0)) {
    throw std::invalid_argument("gen_freq_signal: band must lie within [0, fs/2]");
  }
  const int n = static_cast<int>(std::lround(duration_s * fs));
  Rng rng(seed);

  FrequencyTrack track;
  track.model = TrackModel::tones;
  track.fs = fs;
  track.samples = n;
  track.band_lo = band_lo;
  track.band_hi = band_hi;
  track.mu_t = mu_t;
  track.sigma_t = sigma_t;
  track.sigma_f = sigma_f;

  // Amplitudes partition the unit interval.
  std::vector<double> cuts{0.0, 1.0};
  for (int k = 0; k + 1 < components; ++k) cuts.push_back(rng.uniform());
  std::sort(cuts.begin(), cuts.end());

  for (int k = 0; k < components; ++k) {
    FrequencyComponent comp;
    comp.amplitude = cuts[k + 1] - cuts[k];
    const double f0 = band_lo + (band_hi - band_lo) * rng.uniform();
    const double p0 = 2.0 * M_PI * rng.uniform();
    comp.segments.push_back(FreqSegment{0, f0, p0});
    int next = draw_interval(rng, mu_t, sigma_t);
    while (next < n) {
      const double f = draw_banded_freq(rng, comp.segments.back().freq, sigma_f, band_lo, band_hi);
      push_continuous(comp.segments, next, f, fs);
      next += draw_interval(rng, mu_t, sigma_t);
    }
    track.components.push_back(std::move(comp));
  }

  Vec samples = Vec::Zero(n);
  for (const auto& comp : track.components) {
    for (int t = 0; t < n; ++t) {
      const auto& seg = comp.segment_at(t);
      samples[t] += comp.amplitude * std::cos(2.0 * M_PI * seg.freq * (t / fs) + seg.phase);
    }
  }
  return {samples, track};
}

std::pair<Vec, FrequencyTrack> gen_theta_gamma(double fs, double a_theta, double a_gamma,
                                               double drift_theta, double drift_gamma,
                                               double change_ms, double duration_s, double sigma,
                                               std::uint64_t seed) {
  if (!(duration_s > 0.0)) throw std::invalid_argument("gen_theta_gamma: non-positive duration");
  if (!(change_ms > 0.0)) throw std::invalid_argument("gen_theta_gamma: non-positive change interval");
  if (fs < 2.0 * 87.0) throw std::invalid_argument("gen_theta_gamma: fs too low for the gamma band");
  constexpr double kThetaLo = 4.0, kThetaHi = 7.0;
  constexpr double kGammaLo = 30.0, kGammaHi = 80.0;
  const int n = static_cast<int>(std::lround(duration_s * fs));
  const int hop = std::max(1, static_cast<int>(std::lround(change_ms / 1000.0 * fs)));
  Rng rng(seed);

  FrequencyTrack track;
  track.model = TrackModel::theta_gamma;
  track.fs = fs;
  track.samples = n;
  track.band_lo = 0.0;
  track.band_hi = fs / 2.0;

  const double bands[2][2] = {{kThetaLo, kThetaHi}, {kGammaLo, kGammaHi}};
  const double drifts[2] = {drift_theta, drift_gamma};
  const double amps[2] = {a_theta, a_gamma};
  for (int c = 0; c < 2; ++c) {
    FrequencyComponent comp;
    comp.amplitude = amps[c];
    const double f0 = bands[c][0] + (bands[c][1] - bands[c][0]) * rng.uniform();
    const double p0 = 2.0 * M_PI * rng.uniform();
    comp.segments.push_back(FreqSegment{0, f0, p0});
    for (int next = hop; next < n; next += hop) {
      const double f = drifts[c] > 0.0
                           ? draw_banded_freq(rng, comp.segments.back().freq, drifts[c],
                                              bands[c][0], bands[c][1])
                           : comp.segments.back().freq;
      push_continuous(comp.segments, next, f, fs);
    }
    track.components.push_back(std::move(comp));
  }

  Vec samples(n);
  for (int t = 0; t < n; ++t) {
    const auto& th = track.components[0].segment_at(t);
    const auto& ga = track.components[1].segment_at(t);
    const double ts = t / fs;
    const double carrier = a_theta * std::cos(2.0 * M_PI * th.freq * ts + th.phase);
    const double mod = 1.0 + a_gamma * std::cos(2.0 * M_PI * ga.freq * ts + ga.phase);
    samples[t] = carrier * mod;
  }
  if (sigma > 0.0) {
    for (int t = 0; t < n; ++t) samples[t] += sigma * rng.gaussian();
  }
  return {samples, track};
}

Scenario gen_tracking_scenario(const GridGeometry& grid, int targets, int measurement_rows,
                               double sigma, int speed, int steps, std::uint64_t seed) {
  if (measurement_rows < 1) throw std::invalid_argument("gen_tracking_scenario: M must be >= 1");
  if (!(sigma >= 0.0)) throw std::invalid_argument("gen_tracking_scenario: sigma must be >= 0");
  Scenario sc;
  sc.grid = grid;
  sc.sigma = sigma;
  sc.seed = seed;
  sc.targets = targets;
  sc.measurement_rows = measurement_rows;
  sc.speed = speed;

  // Draw order is streaming so a shorter run is a prefix of a longer one:
  // operator, initial placement, then per step (moves, measurement noise).
  Rng rng(seed);
  const int n = grid.size();
  const double scale = 1.0 / std::sqrt(static_cast<double>(measurement_rows));
  Mat a(measurement_rows, n);
  for (int i = 0; i < measurement_rows; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = scale * rng.gaussian();
  }
  sc.operators.push_back(std::move(a));

  std::vector<int> pos;
  std::vector<char> used(n, 0);
  while (static_cast<int>(pos.size()) < targets) {
    const int c = rng.uniform_int(n);
    if (!used[c]) {
      used[c] = 1;
      pos.push_back(c);
    }
  }
  for (int s = 0; s < steps; ++s) {
    if (s > 0) {
      for (auto& p : pos) {
        for (int mv = 0; mv < speed; ++mv) p = reflected_move(grid, p, rng);
      }
    }
    Vec state = Vec::Zero(n);
    for (int p : pos) state[p] += 1.0;
    Vec y = sc.operators[0] * state;
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sigma * rng.gaussian();
    sc.true_states.push_back(std::move(state));
    sc.measurements.push_back(std::move(y));
  }
  return sc;
}

}  // namespace emdflow::synth
