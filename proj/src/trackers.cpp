#include "emdflow/trackers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace emdflow::trackers {

namespace {

using solver::CompositeProgram;
using solver::SolveReport;
using solver::SolverOptions;

solver::SpMat sparse_from_dense(const Mat& a, int total_cols, int col_offset = 0) {
  solver::SpMat h(a.rows(), total_cols);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(a.size());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) {
      if (a(i, j) != 0.0) trips.emplace_back(i, col_offset + j, a(i, j));
    }
  }
  h.setFromTriplets(trips.begin(), trips.end());
  return h;
}

Vec clamp_nonneg_prediction(const Vec& prediction) {
  for (Eigen::Index i = 0; i < prediction.size(); ++i) {
    if (prediction[i] < -1e-9) {
      throw std::invalid_argument("prediction must be nonnegative");
    }
  }
  return prediction.cwiseMax(0.0);
}

/// min 1/2||b - Hv||^2 + sum w_i|v_i|, optionally with v >= 0.
SolveReport weighted_l1_solve(const Mat& h, const Vec& b, const Vec& weights, bool nonneg,
                              const SolverOptions& opt) {
  auto p = CompositeProgram::sized(static_cast<int>(h.cols()));
  p.H = sparse_from_dense(h, p.n);
  p.b = b;
  p.l1_weights = weights;
  if (nonneg) p.lower.setZero();
  return solver::solve(p, opt);
}

int flux_offset(int n) { return n; }

/// Shared assembly of the Beckmann-flux constraint block for EMD-DF.
/// Variables: [state (n_state), flux (D*n), v (n), v_pred (n), u].
struct BeckmannBlock {
  int n_flux_begin, n_v, n_vpred, n_u, n_total;
  std::vector<Eigen::Triplet<double>> eq;  // div rows then two mass rows
  int eq_rows;
};

BeckmannBlock beckmann_block(const GridGeometry& grid, int n_state) {
  const int n = grid.size();
  const int d = grid.ndim();
  BeckmannBlock blk;
  blk.n_flux_begin = n_state;
  blk.n_v = n_state + d * n;
  blk.n_vpred = blk.n_v + n;
  blk.n_u = blk.n_vpred + n;
  blk.n_total = blk.n_u + 1;

  std::vector<int> step(d);
  int acc = 1;
  for (int a = d - 1; a >= 0; --a) {
    step[a] = acc;
    acc *= grid.dims()[a];
  }
  for (int i = 0; i < n; ++i) {
    const std::vector<int> idx = grid.unflatten(i);
    for (int a = 0; a < d; ++a) {
      blk.eq.emplace_back(i, blk.n_flux_begin + a * n + i, 1.0);
      if (idx[a] > 0) blk.eq.emplace_back(i, blk.n_flux_begin + a * n + i - step[a], -1.0);
    }
    blk.eq.emplace_back(i, blk.n_vpred + i, 1.0);
    blk.eq.emplace_back(i, blk.n_v + i, -1.0);
    blk.eq.emplace_back(n, blk.n_v + i, 1.0);
    blk.eq.emplace_back(n + 1, blk.n_vpred + i, 1.0);
  }
  blk.eq.emplace_back(n, blk.n_u, -1.0);
  blk.eq.emplace_back(n + 1, blk.n_u, -1.0);
  blk.eq_rows = n + 2;
  return blk;
}

void add_beckmann_groups_and_pins(CompositeProgram& p, const GridGeometry& grid, int flux_begin,
                                  double weight) {
  const int n = grid.size();
  const int d = grid.ndim();
  for (int i = 0; i < n; ++i) {
    const std::vector<int> idx = grid.unflatten(i);
    solver::NormGroup g;
    g.weight = weight;
    for (int a = 0; a < d; ++a) {
      const int var = flux_begin + a * n + i;
      if (idx[a] == grid.dims()[a] - 1) {
        p.lower[var] = 0.0;
        p.upper[var] = 0.0;  // zero-flux boundary
      } else {
        g.index.push_back(var);
      }
    }
    if (!g.index.empty()) p.groups.push_back(std::move(g));
  }
}

void check_uniform_spacing(const GridGeometry& grid) {
  if (grid.ndim() == 2 && grid.spacing()[0] != grid.spacing()[1]) {
    throw std::invalid_argument("EMD-DF Beckmann backend requires uniform spacing");
  }
}

void throw_on_failure(const SolveReport& rep, const char* who) {
  if (rep.status == solver::SolveStatus::infeasible ||
      rep.status == solver::SolveStatus::unbounded) {
    throw std::runtime_error(std::string(who) + ": solver reported " +
                             solver::to_string(rep.status));
  }
}

}  // namespace

DynamicsModel DynamicsModel::identity() { return DynamicsModel{}; }

DynamicsModel DynamicsModel::top_q(int q) {
  DynamicsModel m;
  m.kind = Kind::top_q;
  m.q = q;
  return m;
}

DynamicsModel DynamicsModel::blur3() {
  DynamicsModel m;
  m.kind = Kind::blur;
  m.kernel_taps = Vec::Constant(3, 1.0 / 3.0);
  return m;
}

DynamicsModel DynamicsModel::top_q_blur(int q) {
  DynamicsModel m = blur3();
  m.kind = Kind::top_q_blur;
  m.q = q;
  return m;
}

Vec top_q_threshold(const Vec& x, int q) {
  if (q < 1) throw std::invalid_argument("top_q_threshold: q must be >= 1");
  std::vector<int> idx;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x[i] != 0.0) idx.push_back(static_cast<int>(i));
  }
  std::sort(idx.begin(), idx.end(), [&](int a, int b) {
    const double ma = std::abs(x[a]), mb = std::abs(x[b]);
    if (ma != mb) return ma > mb;
    return a < b;  // deterministic tie-break: keep the lowest index
  });
  const int keep = std::min<int>(q, static_cast<int>(idx.size()));
  Vec out = Vec::Zero(x.size());
  for (int k = 0; k < keep; ++k) out[idx[k]] = x[idx[k]];
  return out;
}

Vec blur(const Vec& x, const GridGeometry& grid, const Vec& taps) {
  if (taps.size() % 2 == 0 || taps.size() < 1) {
    throw std::invalid_argument("blur: taps must have odd length");
  }
  if (taps.minCoeff() < 0.0) throw std::invalid_argument("blur: taps must be nonnegative");
  const int r = static_cast<int>(taps.size()) / 2;
  Vec cur = x;
  for (int axis = 0; axis < grid.ndim(); ++axis) {
    Vec next = Vec::Zero(cur.size());
    for (int i = 0; i < grid.size(); ++i) {
      if (cur[i] == 0.0) continue;
      std::vector<int> idx = grid.unflatten(i);
      const int center = idx[axis];
      double wsum = 0.0;
      for (int t = -r; t <= r; ++t) {
        const int p = center + t;
        if (p >= 0 && p < grid.dims()[axis]) wsum += taps[t + r];
      }
      for (int t = -r; t <= r; ++t) {
        const int p = center + t;
        if (p < 0 || p >= grid.dims()[axis]) continue;
        idx[axis] = p;
        next[grid.flatten(idx)] += cur[i] * taps[t + r] / wsum;
      }
    }
    cur = next;
  }
  return cur;
}

Vec predict(const Vec& previous_estimate, const DynamicsModel& model, const GridGeometry& grid) {
  switch (model.kind) {
    case DynamicsModel::Kind::identity:
      return previous_estimate;
    case DynamicsModel::Kind::top_q:
      return top_q_threshold(previous_estimate, model.q);
    case DynamicsModel::Kind::blur:
      return blur(previous_estimate, grid, model.kernel_taps);
    case DynamicsModel::Kind::top_q_blur:
      return blur(top_q_threshold(previous_estimate, model.q), grid, model.kernel_taps);
    case DynamicsModel::Kind::linear:
      if (model.linear_g.cols() != previous_estimate.size()) {
        throw std::invalid_argument("predict: linear dynamics shape mismatch");
      }
      return model.linear_g * previous_estimate;
  }
  throw std::logic_error("predict: unknown dynamics kind");
}

solver::SolverOptions solver_options(const TrackerConfig& cfg) {
  SolverOptions opt;
  opt.primal_tol = cfg.primal_tol;
  opt.dual_tol = cfg.dual_tol;
  opt.max_iters = cfg.max_iters;
  return opt;
}

Vec bpdn(const Vec& y, const Mat& A, double lambda, const SolverOptions& opt) {
  if (lambda < 0.0) throw std::invalid_argument("bpdn: lambda must be >= 0");
  const Vec w = Vec::Constant(A.cols(), lambda);
  auto rep = weighted_l1_solve(A, y, w, false, opt);
  throw_on_failure(rep, "bpdn");
  return rep.v;
}

Vec rwl1_weight_update(const Vec& x, double beta, double eta) {
  if (eta <= 0.0) throw std::invalid_argument("rwl1_weight_update: eta must be > 0");
  Vec w(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) w[i] = beta / (std::abs(x[i]) + eta);
  return w;
}

Vec rwl1_df_weight_update(const Vec& x, const Vec& prediction, double xi, double beta,
                          double eta) {
  if (eta <= 0.0) throw std::invalid_argument("rwl1_df_weight_update: eta must be > 0");
  if (x.size() != prediction.size()) {
    throw std::invalid_argument("rwl1_df_weight_update: size mismatch");
  }
  Vec w(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    w[i] = xi / (beta * std::abs(x[i]) + std::abs(prediction[i]) + eta);
  }
  return w;
}

Vec rwl1(const Vec& y, const Mat& A, double lambda0, double beta, double eta, int iters,
         const SolverOptions& opt) {
  if (eta <= 0.0) throw std::invalid_argument("rwl1: eta must be > 0");
  if (iters < 1) throw std::invalid_argument("rwl1: iters must be >= 1");
  // Eq. (5) uses an unhalved misfit; fold the factor into the operator.
  const Mat h = std::sqrt(2.0) * A;
  const Vec b = std::sqrt(2.0) * y;
  Vec weights = Vec::Ones(A.cols());
  SolverOptions o = opt;
  Vec x;
  for (int k = 0; k < iters; ++k) {
    auto rep = weighted_l1_solve(h, b, lambda0 * weights, false, o);
    throw_on_failure(rep, "rwl1");
    x = rep.v;
    o.warm_v = rep.v;
    weights = rwl1_weight_update(x, beta, eta);
  }
  return x;
}

Vec bpdn_df(const Vec& y, const Mat& A, double lambda, double gamma, const Vec& prediction,
            const SolverOptions& opt) {
  if (gamma < 0.0) throw std::invalid_argument("bpdn_df: gamma must be >= 0");
  if (gamma == 0.0) return bpdn(y, A, lambda, opt);
  if (prediction.size() != A.cols()) throw std::invalid_argument("bpdn_df: prediction size");
  const double s = std::sqrt(2.0 * gamma);
  Mat h(A.rows() + A.cols(), A.cols());
  h.topRows(A.rows()) = A;
  h.bottomRows(A.cols()) = s * Mat::Identity(A.cols(), A.cols());
  Vec b(A.rows() + A.cols());
  b.head(A.rows()) = y;
  b.tail(A.cols()) = s * prediction;
  auto rep = weighted_l1_solve(h, b, Vec::Constant(A.cols(), lambda), false, opt);
  throw_on_failure(rep, "bpdn_df");
  return rep.v;
}

Vec rwl1_df(const Vec& y, const Mat& A, double xi, double beta, double eta, int iters,
            const Vec& prediction, const SolverOptions& opt) {
  if (eta <= 0.0) throw std::invalid_argument("rwl1_df: eta must be > 0");
  if (prediction.size() != A.cols()) throw std::invalid_argument("rwl1_df: prediction size");
  const Mat h = std::sqrt(2.0) * A;
  const Vec b = std::sqrt(2.0) * y;
  Vec x = Vec::Zero(A.cols());
  SolverOptions o = opt;
  for (int k = 0; k < iters; ++k) {
    const Vec weights = rwl1_df_weight_update(x, prediction, xi, beta, eta);
    auto rep = weighted_l1_solve(h, b, weights, false, o);
    throw_on_failure(rep, "rwl1_df");
    x = rep.v;
    o.warm_v = rep.v;
  }
  return x;
}

namespace {

EmdDfResult nonneg_bpdn_fallback(const Vec& y, const Mat& A, const TrackerConfig& cfg,
                                 const SolverOptions& opt) {
  auto rep = weighted_l1_solve(A, y, Vec::Constant(A.cols(), cfg.lambda), true, opt);
  throw_on_failure(rep, "emd_df_nonneg");
  EmdDfResult out;
  out.x = rep.v;
  out.total_flow = 0.0;
  out.report = std::move(rep);
  return out;
}

}  // namespace

EmdDfResult emd_df_nonneg(const Vec& y, const Mat& A, const TrackerConfig& cfg,
                          const Vec& prediction, const GridGeometry& grid, EmdBackend backend,
                          const Vec* warm_x) {
  cfg.validate();
  const int n = grid.size();
  if (A.cols() != n || prediction.size() != n || y.size() != A.rows()) {
    throw std::invalid_argument("emd_df_nonneg: shape mismatch");
  }
  SolverOptions opt = solver_options(cfg);
  const Vec pred = clamp_nonneg_prediction(prediction);
  const double pred_mass = pred.sum();
  const std::vector<int> support = transport::sparse_column_reduction(pred);
  if (support.empty()) {
    // A zero prediction forces u = 0 by the mass law; the transport block is inert.
    return nonneg_bpdn_fallback(y, A, cfg, opt);
  }

  CompositeProgram p;
  int u_idx = -1;
  if (backend == EmdBackend::general) {
    const int k = static_cast<int>(support.size());
    const auto dm = transport::distance_matrix(grid, support);
    u_idx = n + n * k;
    p = CompositeProgram::sized(u_idx + 1);
    p.H = sparse_from_dense(A, p.n);
    p.b = y;
    for (int i = 0; i < n; ++i) {
      p.l1_weights[i] = cfg.lambda;
      p.lower[i] = 0.0;
      for (int c = 0; c < k; ++c) {
        p.c[n + i * k + c] = cfg.gamma * dm.R(i, c);
        p.lower[n + i * k + c] = 0.0;
      }
    }
    p.c[u_idx] = -cfg.mu;
    p.lower[u_idx] = 0.0;
    p.upper[u_idx] = pred_mass;

    std::vector<Eigen::Triplet<double>> et, gt;
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) {
        const int f = n + i * k + c;
        et.emplace_back(0, f, 1.0);
        gt.emplace_back(i, f, 1.0);
        gt.emplace_back(n + c, f, 1.0);
      }
      gt.emplace_back(i, i, -1.0);
      gt.emplace_back(n + k, i, -1.0);
    }
    gt.emplace_back(n + k, u_idx, 1.0);
    et.emplace_back(0, u_idx, -1.0);
    p.E.resize(1, p.n);
    p.E.setFromTriplets(et.begin(), et.end());
    p.e = Vec::Zero(1);
    p.G.resize(n + k + 1, p.n);
    p.G.setFromTriplets(gt.begin(), gt.end());
    p.h = Vec::Zero(n + k + 1);
    for (int c = 0; c < k; ++c) p.h[n + c] = pred[support[c]];
  } else {
    check_uniform_spacing(grid);
    const auto blk = beckmann_block(grid, n);
    u_idx = blk.n_u;
    p = CompositeProgram::sized(blk.n_total);
    p.H = sparse_from_dense(A, p.n);
    p.b = y;
    for (int i = 0; i < n; ++i) {
      p.l1_weights[i] = cfg.lambda;
      p.lower[i] = 0.0;
      p.lower[blk.n_v + i] = 0.0;
      p.lower[blk.n_vpred + i] = 0.0;
      p.upper[blk.n_vpred + i] = pred[i];
    }
    p.c[u_idx] = -cfg.mu;
    p.lower[u_idx] = 0.0;
    p.upper[u_idx] = pred_mass;
    add_beckmann_groups_and_pins(p, grid, blk.n_flux_begin, cfg.gamma * grid.spacing()[0]);

    p.E.resize(blk.eq_rows, p.n);
    p.E.setFromTriplets(blk.eq.begin(), blk.eq.end());
    p.e = Vec::Zero(blk.eq_rows);
    std::vector<Eigen::Triplet<double>> gt;
    for (int i = 0; i < n; ++i) {
      gt.emplace_back(i, blk.n_v + i, 1.0);
      gt.emplace_back(i, i, -1.0);
      gt.emplace_back(n, i, -1.0);
    }
    gt.emplace_back(n, u_idx, 1.0);
    p.G.resize(n + 1, p.n);
    p.G.setFromTriplets(gt.begin(), gt.end());
    p.h = Vec::Zero(n + 1);
  }

  if (warm_x && warm_x->size() == n) {
    Vec v0 = Vec::Zero(p.n);
    v0.head(n) = warm_x->cwiseMax(0.0);
    opt.warm_v = v0;
  }
  auto rep = solver::solve(p, opt);
  throw_on_failure(rep, "emd_df_nonneg");
  EmdDfResult out;
  out.x = rep.v.head(n);
  out.total_flow = rep.v[u_idx];
  out.report = std::move(rep);
  return out;
}

ComplexEmdDfResult emd_df_complex(const CVec& y, const CMat& A, const TrackerConfig& cfg,
                                  const Vec& prediction_magnitudes, const GridGeometry& grid,
                                  EmdBackend backend, const Vec* warm_split) {
  cfg.validate();
  const int n = grid.size();
  if (A.cols() != n || prediction_magnitudes.size() != n || y.size() != A.rows()) {
    throw std::invalid_argument("emd_df_complex: shape mismatch");
  }
  SolverOptions opt = solver_options(cfg);
  const Vec pred = clamp_nonneg_prediction(prediction_magnitudes);
  const double pred_mass = pred.sum();
  const std::vector<int> support = transport::sparse_column_reduction(pred);

  const Mat h = realify_operator(A);
  const Vec b = realify_rhs(y);
  const int nz = 4 * n;

  CompositeProgram p;
  int u_idx = -1;
  if (support.empty()) {
    p = CompositeProgram::sized(nz);
  } else if (backend == EmdBackend::general) {
    const int k = static_cast<int>(support.size());
    const auto dm = transport::distance_matrix(grid, support);
    u_idx = nz + n * k;
    p = CompositeProgram::sized(u_idx + 1);
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) {
        p.c[nz + i * k + c] = cfg.gamma * dm.R(i, c);
        p.lower[nz + i * k + c] = 0.0;
      }
    }
    p.c[u_idx] = -cfg.mu;
    p.lower[u_idx] = 0.0;
    p.upper[u_idx] = pred_mass;

    std::vector<Eigen::Triplet<double>> et, gt;
    for (int i = 0; i < n; ++i) {
      for (int c = 0; c < k; ++c) {
        const int f = nz + i * k + c;
        et.emplace_back(0, f, 1.0);
        gt.emplace_back(i, f, 1.0);
        gt.emplace_back(n + c, f, 1.0);
      }
      for (int part = 0; part < 4; ++part) gt.emplace_back(i, part * n + i, -1.0);
      for (int part = 0; part < 4; ++part) gt.emplace_back(n + k, part * n + i, -1.0);
    }
    gt.emplace_back(n + k, u_idx, 1.0);
    et.emplace_back(0, u_idx, -1.0);
    p.E.resize(1, p.n);
    p.E.setFromTriplets(et.begin(), et.end());
    p.e = Vec::Zero(1);
    p.G.resize(n + k + 1, p.n);
    p.G.setFromTriplets(gt.begin(), gt.end());
    p.h = Vec::Zero(n + k + 1);
    for (int c = 0; c < k; ++c) p.h[n + c] = pred[support[c]];
  } else {
    check_uniform_spacing(grid);
    const auto blk = beckmann_block(grid, nz);
    u_idx = blk.n_u;
    p = CompositeProgram::sized(blk.n_total);
    for (int i = 0; i < n; ++i) {
      p.lower[blk.n_v + i] = 0.0;
      p.lower[blk.n_vpred + i] = 0.0;
      p.upper[blk.n_vpred + i] = pred[i];
    }
    p.c[u_idx] = -cfg.mu;
    p.lower[u_idx] = 0.0;
    p.upper[u_idx] = pred_mass;
    add_beckmann_groups_and_pins(p, grid, blk.n_flux_begin, cfg.gamma * grid.spacing()[0]);
    p.E.resize(blk.eq_rows, p.n);
    p.E.setFromTriplets(blk.eq.begin(), blk.eq.end());
    p.e = Vec::Zero(blk.eq_rows);
    std::vector<Eigen::Triplet<double>> gt;
    for (int i = 0; i < n; ++i) {
      gt.emplace_back(i, blk.n_v + i, 1.0);
      for (int part = 0; part < 4; ++part) gt.emplace_back(i, part * n + i, -1.0);
      for (int part = 0; part < 4; ++part) gt.emplace_back(n, part * n + i, -1.0);
    }
    gt.emplace_back(n, u_idx, 1.0);
    p.G.resize(n + 1, p.n);
    p.G.setFromTriplets(gt.begin(), gt.end());
    p.h = Vec::Zero(n + 1);
  }

  p.H = sparse_from_dense(h, p.n);
  p.b = b;
  for (int i = 0; i < nz; ++i) {
    p.l1_weights[i] = cfg.lambda;
    p.lower[i] = 0.0;
  }
  if (warm_split && warm_split->size() == nz) {
    Vec v0 = Vec::Zero(p.n);
    v0.head(nz) = warm_split->cwiseMax(0.0);
    opt.warm_v = v0;
  }

  auto rep = solver::solve(p, opt);
  throw_on_failure(rep, "emd_df_complex");

  ComplexEmdDfResult out;
  out.z_split = rep.v.head(nz);
  // Pairwise cancellation of overlapping split energy canonicalizes the output.
  for (int i = 0; i < n; ++i) {
    const double mr = std::min(out.z_split[i], out.z_split[n + i]);
    out.z_split[i] -= mr;
    out.z_split[n + i] -= mr;
    const double mi = std::min(out.z_split[2 * n + i], out.z_split[3 * n + i]);
    out.z_split[2 * n + i] -= mi;
    out.z_split[3 * n + i] -= mi;
  }
  ComplexSplit split{out.z_split.segment(0, n), out.z_split.segment(n, n),
                     out.z_split.segment(2 * n, n), out.z_split.segment(3 * n, n)};
  out.z = recompose(split);
  out.total_flow = u_idx >= 0 ? rep.v[u_idx] : 0.0;
  out.report = std::move(rep);
  return out;
}

const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::bpdn: return "bpdn";
    case Algorithm::rwl1: return "rwl1";
    case Algorithm::bpdn_df: return "bpdn-df";
    case Algorithm::rwl1_df: return "rwl1-df";
    case Algorithm::emd_df_nonneg: return "emd-df";
  }
  return "unknown";
}

Algorithm algorithm_from_string(const std::string& s) {
  if (s == "bpdn") return Algorithm::bpdn;
  if (s == "rwl1") return Algorithm::rwl1;
  if (s == "bpdn-df") return Algorithm::bpdn_df;
  if (s == "rwl1-df") return Algorithm::rwl1_df;
  if (s == "emd-df") return Algorithm::emd_df_nonneg;
  throw std::invalid_argument("unknown tracker algorithm: " + s);
}

std::vector<StepRecord> track_sequence(const std::vector<Vec>& measurements,
                                       const std::vector<Mat>& operators,
                                       const GridGeometry& grid, const TrackerSpec& spec) {
  if (measurements.empty()) throw std::invalid_argument("track_sequence: no measurements");
  if (operators.size() != 1 && operators.size() != measurements.size()) {
    throw std::invalid_argument("track_sequence: operator count mismatch");
  }
  spec.cfg.validate();
  const int n = grid.size();
  const SolverOptions opt = solver_options(spec.cfg);

  std::vector<StepRecord> records;
  records.reserve(measurements.size());
  Vec prev = Vec::Zero(n);
  for (size_t step = 0; step < measurements.size(); ++step) {
    const Mat& a = operators.size() == 1 ? operators[0] : operators[step];
    const Vec& y = measurements[step];
    const Vec pred = step == 0 ? Vec(Vec::Zero(n)) : predict(prev, spec.dynamics, grid);
    StepRecord rec;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      switch (spec.alg) {
        case Algorithm::bpdn:
          rec.estimate = bpdn(y, a, spec.cfg.lambda, opt);
          break;
        case Algorithm::rwl1:
          rec.estimate = rwl1(y, a, spec.cfg.lambda, spec.cfg.beta, spec.cfg.eta,
                              spec.cfg.rwl1_iters, opt);
          break;
        case Algorithm::bpdn_df:
          rec.estimate = bpdn_df(y, a, spec.cfg.lambda, spec.cfg.gamma, pred, opt);
          break;
        case Algorithm::rwl1_df:
          rec.estimate = rwl1_df(y, a, spec.cfg.xi, spec.cfg.beta, spec.cfg.eta,
                                 spec.cfg.rwl1_iters, pred, opt);
          break;
        case Algorithm::emd_df_nonneg: {
          auto res = emd_df_nonneg(y, a, spec.cfg, pred.cwiseMax(0.0), grid, spec.backend,
                                   step > 0 ? &prev : nullptr);
          rec.estimate = std::move(res.x);
          rec.total_flow = res.total_flow;
          rec.solver = solver::compile_report(res.report);
          break;
        }
      }
    } catch (const std::exception& ex) {
      throw std::runtime_error("track_sequence: step " + std::to_string(step) + ": " + ex.what());
    }
    rec.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    prev = rec.estimate;
    records.push_back(std::move(rec));
  }
  return records;
}

}  // namespace emdflow::trackers
