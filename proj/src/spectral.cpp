#include "emdflow/spectral.hpp"

#include "emdflow/solver.hpp"

#include <cmath>
#include <stdexcept>

namespace emdflow::spectral {

namespace {

using solver::CompositeProgram;
using solver::SolveReport;
using solver::SolverOptions;

solver::SpMat sparse_from_dense(const Mat& a, int total_cols) {
  solver::SpMat h(a.rows(), total_cols);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(a.size());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) trips.emplace_back(i, j, a(i, j));
    }
  }
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

void cancel_split_stack(Vec& split, int n) {
  for (int i = 0; i < n; ++i) {
    const double mr = std::min(split[i], split[n + i]);
    split[i] -= mr;
    split[n + i] -= mr;
    const double mi = std::min(split[2 * n + i], split[3 * n + i]);
    split[2 * n + i] -= mi;
    split[3 * n + i] -= mi;
  }
}

CVec recompose_stack(const Vec& split, int n) {
  ComplexSplit s{split.segment(0, n), split.segment(n, n), split.segment(2 * n, n),
                 split.segment(3 * n, n)};
  return recompose(s);
}

/// min 1/2||b - Hz'||^2 + sum w|z'| + gamma||z - z_pred||^2 over z' >= 0,
/// where the quadratic tracking term acts on the recomposed differences.
SolveReport complex_weighted_l1(const Mat& h_meas, const Vec& b_meas, const Vec& weights,
                                double gamma, const CVec* z_pred, const SolverOptions& opt) {
  const int nz = static_cast<int>(h_meas.cols());
  const int n = nz / 4;
  Mat h;
  Vec b;
  if (gamma > 0.0 && z_pred) {
    const double s = std::sqrt(2.0 * gamma);
    h.setZero(h_meas.rows() + 2 * n, nz);
    h.topRows(h_meas.rows()) = h_meas;
    for (int i = 0; i < n; ++i) {
      h(h_meas.rows() + i, i) = s;
      h(h_meas.rows() + i, n + i) = -s;
      h(h_meas.rows() + n + i, 2 * n + i) = s;
      h(h_meas.rows() + n + i, 3 * n + i) = -s;
    }
    b.resize(b_meas.size() + 2 * n);
    b.head(b_meas.size()) = b_meas;
    b.segment(b_meas.size(), n) = z_pred->real();
    b.tail(n) = z_pred->imag();
    b.segment(b_meas.size(), 2 * n) *= s;
  } else {
    h = h_meas;
    b = b_meas;
  }
  auto p = CompositeProgram::sized(nz);
  p.H = sparse_from_dense(h, nz);
  p.b = b;
  p.l1_weights = weights;
  p.lower.setZero();
  return solver::solve(p, opt);
}

}  // namespace

Vec OvercompleteDft::freq_axis(double fs) const {
  Vec f(reported_bins());
  for (int n = 0; n < reported_bins(); ++n) f[n] = n * fs / atoms;
  return f;
}

OvercompleteDft build_dictionary(int window, double oversampling) {
  if (window < 2) throw std::invalid_argument("build_dictionary: window must be >= 2");
  const double n_real = oversampling * window;
  const int n = static_cast<int>(std::lround(n_real));
  if (std::abs(n_real - n) > 1e-9 || n < window) {
    throw std::invalid_argument("build_dictionary: oversampling * window must be an integer >= window");
  }
  OvercompleteDft d;
  d.window = window;
  d.atoms = n;
  d.oversampling = oversampling;
  d.phi.resize(window, n);
  for (int m = 0; m < window; ++m) {
    for (int k = 0; k < n; ++k) {
      const double arg = 2.0 * M_PI * static_cast<double>(m) * static_cast<double>(k) / n;
      d.phi(m, k) = std::complex<double>(std::cos(arg), std::sin(arg));
    }
  }
  return d;
}

std::vector<std::pair<int, Vec>> window_stream(const Vec& samples, int window, int hop) {
  if (hop < 1) throw std::invalid_argument("window_stream: hop must be >= 1");
  if (samples.size() < window) throw std::invalid_argument("window_stream: signal shorter than window");
  std::vector<std::pair<int, Vec>> out;
  for (int start = 0; start + window <= samples.size(); start += hop) {
    out.emplace_back(start, samples.segment(start, window));
  }
  return out;
}

const char* to_string(SpectralTracker t) {
  switch (t) {
    case SpectralTracker::bpdn: return "bpdn";
    case SpectralTracker::bpdn_df: return "bpdn-df";
    case SpectralTracker::rwl1_df: return "rwl1-df";
    case SpectralTracker::emd_df: return "emd-df";
  }
  return "unknown";
}

SpectralTracker spectral_tracker_from_string(const std::string& s) {
  if (s == "bpdn") return SpectralTracker::bpdn;
  if (s == "bpdn-df") return SpectralTracker::bpdn_df;
  if (s == "rwl1-df") return SpectralTracker::rwl1_df;
  if (s == "emd-df") return SpectralTracker::emd_df;
  throw std::invalid_argument("unknown spectral tracker: " + s);
}

TimeFrequencyEstimate track_spectrum(const Vec& samples, const OvercompleteDft& dict,
                                     SpectralTracker alg, const SpectralConfig& cfg, double fs) {
  const int m = dict.window;
  const int n = dict.atoms;
  const int hop = cfg.hop > 0 ? cfg.hop : m / 2;
  const auto windows = window_stream(samples, m, hop);
  const GridGeometry grid({n});

  // Uniform column scaling keeps the solver well conditioned; the magnitudes
  // are only rescaled globally, which the l1 weight absorbs.
  const CMat a = dict.phi / std::sqrt(static_cast<double>(m));
  const Mat h_meas = realify_operator(a);
  const SolverOptions opt = trackers::solver_options(cfg.tracker);

  TimeFrequencyEstimate tf;
  tf.window_length = m;
  tf.freq_axis = dict.freq_axis(fs);
  tf.magnitudes.resize(static_cast<int>(windows.size()), dict.reported_bins());

  CVec prev_z = CVec::Zero(n);
  Vec prev_split = Vec::Zero(4 * n);
  bool have_prev = false;

  for (size_t w = 0; w < windows.size(); ++w) {
    tf.window_starts.push_back(windows[w].first);
    const CVec y = windows[w].second.cast<std::complex<double>>();
    const Vec b_meas = realify_rhs(y);

    const Vec prev_mag = prev_z.cwiseAbs();
    const Vec pred_mag =
        have_prev ? trackers::predict(prev_mag, cfg.dynamics, grid).cwiseMax(0.0)
                  : Vec(Vec::Zero(n));

    CVec z;
    try {
      switch (alg) {
        case SpectralTracker::emd_df: {
          auto res = trackers::emd_df_complex(y, a, cfg.tracker, pred_mag, grid, cfg.backend,
                                              have_prev ? &prev_split : nullptr);
          z = std::move(res.z);
          prev_split = res.z_split;
          break;
        }
        case SpectralTracker::bpdn: {
          auto rep = complex_weighted_l1(h_meas, b_meas,
                                         Vec::Constant(4 * n, cfg.tracker.lambda), 0.0, nullptr,
                                         opt);
          Vec split = rep.v;
          cancel_split_stack(split, n);
          z = recompose_stack(split, n);
          prev_split = split;
          break;
        }
        case SpectralTracker::bpdn_df: {
          // tau_q keeps the complex values of the predicted support.
          CVec z_pred = CVec::Zero(n);
          if (have_prev) {
            const Vec kept = trackers::predict(prev_mag, cfg.dynamics, grid);
            for (int i = 0; i < n; ++i) {
              if (kept[i] > 0.0 && prev_mag[i] > 0.0) z_pred[i] = prev_z[i] * (kept[i] / prev_mag[i]);
            }
          }
          auto rep = complex_weighted_l1(h_meas, b_meas,
                                         Vec::Constant(4 * n, cfg.tracker.lambda),
                                         have_prev ? cfg.tracker.gamma : 0.0, &z_pred, opt);
          Vec split = rep.v;
          cancel_split_stack(split, n);
          z = recompose_stack(split, n);
          prev_split = split;
          break;
        }
        case SpectralTracker::rwl1_df: {
          Vec mag = Vec::Zero(n);
          Vec split;
          SolverOptions o = opt;
          for (int it = 0; it < cfg.tracker.rwl1_iters; ++it) {
            Vec weights(4 * n);
            for (int i = 0; i < n; ++i) {
              const double wi = cfg.tracker.xi /
                                (cfg.tracker.beta * mag[i] + pred_mag[i] + cfg.tracker.eta);
              for (int part = 0; part < 4; ++part) weights[part * n + i] = wi;
            }
            auto rep = complex_weighted_l1(h_meas, b_meas, weights, 0.0, nullptr, o);
            split = rep.v;
            o.warm_v = rep.v;
            Vec canon = split;
            cancel_split_stack(canon, n);
            mag = recompose_stack(canon, n).cwiseAbs();
          }
          cancel_split_stack(split, n);
          z = recompose_stack(split, n);
          prev_split = split;
          break;
        }
      }
    } catch (const std::exception& ex) {
      throw std::runtime_error("track_spectrum: window " + std::to_string(w) + ": " + ex.what());
    }

    prev_z = z;
    have_prev = true;
    for (int bin = 0; bin < dict.reported_bins(); ++bin) {
      tf.magnitudes(static_cast<int>(w), bin) = std::abs(z[bin]);
    }
  }
  return tf;
}

TimeFrequencyEstimate stft_baseline(const Vec& samples, int window, int hop, double fs,
                                    WindowTaper taper) {
  const auto windows = window_stream(samples, window, hop);
  Vec w(window);
  for (int m = 0; m < window; ++m) {
    w[m] = taper == WindowTaper::hamming && window > 1
               ? 0.54 - 0.46 * std::cos(2.0 * M_PI * m / (window - 1))
               : 1.0;
  }
  TimeFrequencyEstimate tf;
  tf.window_length = window;
  tf.freq_axis.resize(window);
  for (int k = 0; k < window; ++k) tf.freq_axis[k] = k * fs / window;
  tf.magnitudes.resize(static_cast<int>(windows.size()), window);
  for (size_t i = 0; i < windows.size(); ++i) {
    tf.window_starts.push_back(windows[i].first);
    for (int k = 0; k < window; ++k) {
      std::complex<double> acc(0.0, 0.0);
      for (int m = 0; m < window; ++m) {
        const double arg = -2.0 * M_PI * static_cast<double>(m) * k / window;
        acc += w[m] * windows[i].second[m] * std::complex<double>(std::cos(arg), std::sin(arg));
      }
      tf.magnitudes(static_cast<int>(i), k) = std::abs(acc);
    }
  }
  return tf;
}

}  // namespace emdflow::spectral
