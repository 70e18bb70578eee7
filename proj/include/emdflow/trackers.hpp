#pragma once

#include "emdflow/core.hpp"
#include "emdflow/solver.hpp"
#include "emdflow/transport.hpp"

#include <vector>

namespace emdflow::trackers {

/// Prediction function x~_n = g(x^_{n-1}).
struct DynamicsModel {
  enum class Kind { identity, top_q, blur, top_q_blur, linear };
  Kind kind = Kind::identity;
  int q = 1;
  Vec kernel_taps;  // separable per-axis taps; averaging box by default
  Mat linear_g;     // used by Kind::linear

  static DynamicsModel identity();
  static DynamicsModel top_q(int q);
  static DynamicsModel blur3();
  static DynamicsModel top_q_blur(int q);
};

/// Keeps the min(q, nnz) largest-magnitude entries, zeroing the rest.
/// Equal magnitudes keep the lowest index.
Vec top_q_threshold(const Vec& x, int q);

/// Separable kernel blur with boundary-truncated, per-source renormalized
/// taps; preserves total mass.
Vec blur(const Vec& x, const GridGeometry& grid, const Vec& taps);

Vec predict(const Vec& previous_estimate, const DynamicsModel& model, const GridGeometry& grid);

enum class EmdBackend { general, beckmann };

solver::SolverOptions solver_options(const TrackerConfig& cfg);

/// min 1/2||y - Ax||^2 + lambda||x||_1
Vec bpdn(const Vec& y, const Mat& A, double lambda, const solver::SolverOptions& opt = {});

/// RWL1 weight update: w_i = beta / (|x_i| + eta).
Vec rwl1_weight_update(const Vec& x, double beta, double eta);

/// Dynamics-informed weight update: w_i = xi / (beta|x_i| + |pred_i| + eta).
Vec rwl1_df_weight_update(const Vec& x, const Vec& prediction, double xi, double beta,
                          double eta);

/// Reweighted l1: ||y - Ax||^2 + lambda0 sum w_i |x_i| with
/// w_i <- beta / (|x_i| + eta) between solves; initial weights are ones.
Vec rwl1(const Vec& y, const Mat& A, double lambda0, double beta, double eta, int iters,
         const solver::SolverOptions& opt = {});

/// BPDN plus gamma ||x - prediction||^2.
Vec bpdn_df(const Vec& y, const Mat& A, double lambda, double gamma, const Vec& prediction,
            const solver::SolverOptions& opt = {});

/// Reweighted l1 with dynamics-informed weights xi / (beta|x_i| + |pred_i| + eta).
Vec rwl1_df(const Vec& y, const Mat& A, double xi, double beta, double eta, int iters,
            const Vec& prediction, const solver::SolverOptions& opt = {});

struct EmdDfResult {
  Vec x;
  double total_flow = 0.0;
  solver::SolveReport report;
};

/// Nonnegative EMD-regularized tracker: the l1/quadratic program is solved
/// jointly with the transport variables (flows or Beckmann flux) and the
/// linearizing slack u.
EmdDfResult emd_df_nonneg(const Vec& y, const Mat& A, const TrackerConfig& cfg,
                          const Vec& prediction, const GridGeometry& grid, EmdBackend backend,
                          const Vec* warm_x = nullptr);

struct ComplexEmdDfResult {
  CVec z;        // recomposed estimate
  Vec z_split;   // canonicalized [Re+, Re-, Im+, Im-] stack, length 4N
  double total_flow = 0.0;
  solver::SolveReport report;
};

/// Complex relaxation over the realified operator [A, -A, iA, -iA]; flows are
/// bounded by the per-element l1 magnitude proxy. Overlapping split energy is
/// cancelled pairwise before recomposition.
ComplexEmdDfResult emd_df_complex(const CVec& y, const CMat& A, const TrackerConfig& cfg,
                                  const Vec& prediction_magnitudes, const GridGeometry& grid,
                                  EmdBackend backend, const Vec* warm_split = nullptr);

enum class Algorithm { bpdn, rwl1, bpdn_df, rwl1_df, emd_df_nonneg };
const char* to_string(Algorithm a);
Algorithm algorithm_from_string(const std::string& s);

struct TrackerSpec {
  Algorithm alg = Algorithm::bpdn;
  TrackerConfig cfg;
  DynamicsModel dynamics;
  EmdBackend backend = EmdBackend::beckmann;
};

struct StepRecord {
  Vec estimate;
  double total_flow = 0.0;
  double wall_time_s = 0.0;
  solver::ReportRecord solver;
};

/// Causal tracking loop. The first step uses a zero prediction; later steps
/// predict from the previous estimate via the configured dynamics.
std::vector<StepRecord> track_sequence(const std::vector<Vec>& measurements,
                                       const std::vector<Mat>& operators,
                                       const GridGeometry& grid, const TrackerSpec& spec);

}  // namespace emdflow::trackers
