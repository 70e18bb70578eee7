#include "emdflow/spectral.hpp"

#include "emdflow/synth.hpp"

#include <doctest.h>

#include <cmath>

using namespace emdflow;
namespace sp = emdflow::spectral;

namespace {

sp::SpectralConfig fast_cfg() {
  sp::SpectralConfig cfg;
  cfg.tracker.lambda = 0.05;
  cfg.tracker.gamma = 0.02;
  cfg.tracker.mu = 0.005;
  cfg.tracker.q = 2;
  cfg.tracker.primal_tol = 1e-7;
  cfg.tracker.dual_tol = 1e-7;
  cfg.tracker.max_iters = 60000;
  cfg.dynamics = trackers::DynamicsModel::top_q(2);
  return cfg;
}

}  // namespace

TEST_SUITE("spectral") {

TEST_CASE("dictionary structure") {
  const auto d = sp::build_dictionary(8, 2.0);
  REQUIRE(d.atoms == 16);
  for (int n = 0; n < 16; ++n) {
    CHECK(std::abs(d.phi(0, n) - std::complex<double>(1.0, 0.0)) < 1e-12);  // m = 0 row
  }
  CHECK(std::abs(d.phi(1, 8) - std::complex<double>(-1.0, 0.0)) < 1e-12);  // exp(i pi)

  // Conjugate structure for real signals: Phi[m][N-n] = conj(Phi[m][n]).
  for (int m = 0; m < 8; ++m) {
    for (int n = 1; n < 16; ++n) {
      CHECK(std::abs(d.phi(m, 16 - n) - std::conj(d.phi(m, n))) < 1e-12);
    }
  }

  // Square dictionary is unitary up to 1/N.
  const auto sq = sp::build_dictionary(8, 1.0);
  const CMat gram = sq.phi * sq.phi.adjoint() / 8.0;
  CHECK((gram - CMat::Identity(8, 8)).cwiseAbs().maxCoeff() < 1e-12);

  // Oversampled bin spacing is fs / (S*M).
  const Vec axis = d.freq_axis(256.0);
  CHECK(axis[1] - axis[0] == doctest::Approx(256.0 / 16));
  CHECK(axis.size() == 8);

  CHECK_THROWS_AS(sp::build_dictionary(8, 1.3), std::invalid_argument);
  CHECK_THROWS_AS(sp::build_dictionary(1, 2.0), std::invalid_argument);
}

TEST_CASE("window stream is causal and bit-exact") {
  Vec s(8);
  for (int i = 0; i < 8; ++i) s[i] = i * 1.25;
  const auto w = sp::window_stream(s, 4, 2);
  REQUIRE(w.size() == 3);
  CHECK(w[0].first == 0);
  CHECK(w[1].first == 2);
  CHECK(w[2].first == 4);
  for (const auto& [start, slice] : w) {
    for (int i = 0; i < 4; ++i) CHECK(slice[i] == s[start + i]);
  }
  CHECK(sp::window_stream(s, 4, 4).size() == 2);  // non-overlapping partition
  CHECK_THROWS_AS(sp::window_stream(Vec::Zero(3), 4, 1), std::invalid_argument);
  CHECK_THROWS_AS(sp::window_stream(s, 4, 0), std::invalid_argument);
}

TEST_CASE("emd-df concentrates an on-grid tone") {
  const double fs = 64.0;
  const int m = 16;
  const auto dict = sp::build_dictionary(m, 2.0);  // 32 atoms, bin = 2 Hz
  const int tone_bin = 4;                          // 8 Hz
  Vec samples(64);
  for (int t = 0; t < 64; ++t) samples[t] = std::cos(2.0 * M_PI * 8.0 * t / fs);

  auto cfg = fast_cfg();
  const auto tf = sp::track_spectrum(samples, dict, sp::SpectralTracker::emd_df, cfg, fs);
  REQUIRE(tf.magnitudes.rows() >= 3);
  for (int w = 0; w < tf.magnitudes.rows(); ++w) {
    const Vec row = tf.magnitudes.row(w);
    double near = 0.0;
    for (int b = tone_bin - 1; b <= tone_bin + 1; ++b) near += row[b];
    CHECK(near >= 0.95 * row.sum());
    int argmax = 0;
    row.maxCoeff(&argmax);
    CHECK(argmax == tone_bin);
  }
}

TEST_CASE("zero signal yields zero magnitudes") {
  const auto dict = sp::build_dictionary(16, 2.0);
  const auto tf =
      sp::track_spectrum(Vec::Zero(48), dict, sp::SpectralTracker::bpdn, fast_cfg(), 64.0);
  CHECK(tf.magnitudes.cwiseAbs().maxCoeff() < 1e-9);
}

TEST_CASE("track_spectrum is reproducible and causal") {
  const double fs = 64.0;
  const auto [clean, track] = synth::gen_freq_signal(fs, 2, 16, 0, 3.0, 0, 32, 1.0, 4);
  const Vec samples = synth::add_noise(clean, 0.05, 5);
  const auto dict = sp::build_dictionary(16, 2.0);
  auto cfg = fast_cfg();

  const auto tf1 = sp::track_spectrum(samples, dict, sp::SpectralTracker::emd_df, cfg, fs);
  const auto tf2 = sp::track_spectrum(samples, dict, sp::SpectralTracker::emd_df, cfg, fs);
  CHECK((tf1.magnitudes - tf2.magnitudes).cwiseAbs().maxCoeff() == 0.0);

  // Perturbing the final sample only affects the final window.
  Vec perturbed = samples;
  perturbed[perturbed.size() - 1] += 5.0;
  const auto tf3 = sp::track_spectrum(perturbed, dict, sp::SpectralTracker::emd_df, cfg, fs);
  const int rows = static_cast<int>(tf1.magnitudes.rows());
  for (int w = 0; w + 1 < rows; ++w) {
    CHECK((tf1.magnitudes.row(w) - tf3.magnitudes.row(w)).cwiseAbs().maxCoeff() == 0.0);
  }
  CHECK((tf1.magnitudes.row(rows - 1) - tf3.magnitudes.row(rows - 1)).cwiseAbs().maxCoeff() >
        0.0);
}

TEST_CASE("stft baseline behavior") {
  const double fs = 64.0;
  // Constant signal, rectangular window: energy only at DC.
  const auto dc = sp::stft_baseline(Vec::Ones(32), 8, 8, fs, sp::WindowTaper::rectangular);
  for (int w = 0; w < dc.magnitudes.rows(); ++w) {
    CHECK(dc.magnitudes(w, 0) == doctest::Approx(8.0));
    for (int k = 1; k < 8; ++k) CHECK(dc.magnitudes(w, k) < 1e-10);
  }
  CHECK(dc.magnitudes.cols() == 8);  // native resolution: M bins

  // On-grid tone, rectangular window, hop = M: two mirrored nonzero bins.
  Vec tone(32);
  for (int t = 0; t < 32; ++t) tone[t] = std::cos(2.0 * M_PI * 2.0 * t / 8.0);
  const auto tf = sp::stft_baseline(tone, 8, 8, fs, sp::WindowTaper::rectangular);
  for (int w = 0; w < tf.magnitudes.rows(); ++w) {
    for (int k = 0; k < 8; ++k) {
      if (k == 2 || k == 6) {
        CHECK(tf.magnitudes(w, k) == doctest::Approx(4.0));
      } else {
        CHECK(tf.magnitudes(w, k) < 1e-10);
      }
    }
  }

  // Parseval: sum |X|^2 = M * sum |w x|^2 for the hamming-tapered frame.
  synth::Rng rng(9);
  Vec noise(24);
  for (int i = 0; i < 24; ++i) noise[i] = rng.gaussian();
  const auto h = sp::stft_baseline(noise, 8, 4, fs, sp::WindowTaper::hamming);
  Vec taper(8);
  for (int m = 0; m < 8; ++m) taper[m] = 0.54 - 0.46 * std::cos(2.0 * M_PI * m / 7.0);
  for (int w = 0; w < h.magnitudes.rows(); ++w) {
    const int start = h.window_starts[w];
    double energy = 0.0;
    for (int m = 0; m < 8; ++m) {
      const double v = taper[m] * noise[start + m];
      energy += v * v;
    }
    CHECK(h.magnitudes.row(w).squaredNorm() ==
          doctest::Approx(8.0 * energy).epsilon(1e-9));
  }
}

}  // TEST_SUITE
