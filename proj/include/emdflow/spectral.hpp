#pragma once

#include "emdflow/core.hpp"
#include "emdflow/trackers.hpp"

#include <string>
#include <utility>
#include <vector>

namespace emdflow::spectral {

/// Overcomplete DFT synthesis dictionary Phi(m, n) = exp(i 2 pi m n / N)
/// for m < window, n < atoms, atoms = oversampling * window.
struct OvercompleteDft {
  int window = 0;
  int atoms = 0;
  double oversampling = 1.0;
  CMat phi;

  int reported_bins() const { return atoms / 2; }  // real signals: n < N/2
  Vec freq_axis(double fs) const;
};

OvercompleteDft build_dictionary(int window, double oversampling);

/// Causal sliding windows: (start index, slice) ending at window-1,
/// window-1+hop, ... Throws if the signal is shorter than one window.
std::vector<std::pair<int, Vec>> window_stream(const Vec& samples, int window, int hop);

struct TimeFrequencyEstimate {
  Mat magnitudes;  // windows x bins
  std::vector<int> window_starts;
  int window_length = 0;
  Vec freq_axis;
};

enum class SpectralTracker { bpdn, bpdn_df, rwl1_df, emd_df };
const char* to_string(SpectralTracker t);
SpectralTracker spectral_tracker_from_string(const std::string& s);

struct SpectralConfig {
  TrackerConfig tracker;
  trackers::DynamicsModel dynamics = trackers::DynamicsModel::top_q(3);
  trackers::EmdBackend backend = trackers::EmdBackend::beckmann;
  int hop = 0;  // 0 means window/2
};

/// Causal sparse spectrum tracking over the dictionary; rows are per-window
/// coefficient magnitudes on the first atoms/2 bins.
TimeFrequencyEstimate track_spectrum(const Vec& samples, const OvercompleteDft& dict,
                                     SpectralTracker alg, const SpectralConfig& cfg, double fs);

enum class WindowTaper { hamming, rectangular };

/// Magnitude STFT at native window resolution (all `window` bins).
TimeFrequencyEstimate stft_baseline(const Vec& samples, int window, int hop, double fs,
                                    WindowTaper taper = WindowTaper::hamming);

}  // namespace emdflow::spectral
