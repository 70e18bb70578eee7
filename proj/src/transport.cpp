#include "emdflow/transport.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace emdflow::transport {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require_nonneg(const Vec& v, const char* name) {
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (!(v[i] >= 0.0)) {
      throw std::invalid_argument(std::string(name) + " must be nonnegative");
    }
  }
}

/// Per-axis strides of the row-major linear index.
std::vector<int> strides(const GridGeometry& grid) {
  const auto& dims = grid.dims();
  std::vector<int> s(dims.size());
  int acc = 1;
  for (int a = static_cast<int>(dims.size()) - 1; a >= 0; --a) {
    s[a] = acc;
    acc *= dims[a];
  }
  return s;
}

bool axis_boundary(const GridGeometry& grid, int cell, int axis) {
  return grid.unflatten(cell)[axis] == grid.dims()[axis] - 1;
}

}  // namespace

DistanceMatrix distance_matrix(const GridGeometry& grid, const std::vector<int>& support,
                               GroundMetric metric) {
  if (support.empty()) throw std::invalid_argument("distance_matrix: empty support");
  const int n = grid.size();
  for (int j : support) {
    if (j < 0 || j >= n) throw std::out_of_range("distance_matrix: support index out of range");
  }
  DistanceMatrix dm;
  dm.columns = support;
  dm.R.resize(n, static_cast<int>(support.size()));
  for (size_t k = 0; k < support.size(); ++k) {
    const Vec cj = grid.coordinate(support[k]);
    for (int i = 0; i < n; ++i) {
      const Vec ci = grid.coordinate(i);
      dm.R(i, static_cast<int>(k)) = metric == GroundMetric::euclidean
                                         ? (ci - cj).norm()
                                         : (ci - cj).cwiseAbs().sum();
    }
  }
  return dm;
}

std::vector<int> sparse_column_reduction(const Vec& prediction) {
  std::vector<int> support;
  for (Eigen::Index i = 0; i < prediction.size(); ++i) {
    if (prediction[i] > 0.0) support.push_back(static_cast<int>(i));
  }
  return support;
}

Vec divergence(const Mat& flux, const GridGeometry& grid) {
  const int n = grid.size();
  const int d = grid.ndim();
  if (flux.rows() != n || flux.cols() != d) {
    throw std::invalid_argument("divergence: flux shape does not match grid");
  }
  const std::vector<int> step = strides(grid);
  Vec out = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    const std::vector<int> idx = grid.unflatten(i);
    for (int a = 0; a < d; ++a) {
      double val = flux(i, a);
      if (idx[a] > 0) val -= flux(i - step[a], a);
      out[i] += val;
    }
  }
  return out;
}

double emd_1d_oracle(const Vec& x, const Vec& y, double spacing, double mass_tol) {
  if (x.size() != y.size()) throw std::invalid_argument("emd_1d_oracle: length mismatch");
  require_nonneg(x, "emd_1d_oracle: x");
  require_nonneg(y, "emd_1d_oracle: y");
  const double sx = x.sum(), sy = y.sum();
  if (std::abs(sx - sy) > mass_tol * std::max(1.0, std::max(sx, sy))) {
    throw std::invalid_argument("emd_1d_oracle: operand masses differ");
  }
  double cum = 0.0, total = 0.0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    cum += x[i] - y[i];
    total += std::abs(cum);
  }
  return total * spacing;
}

EmdValue emd_general(const Vec& x, const Vec& y, const DistanceMatrix& R) {
  require_nonneg(x, "emd_general: x");
  require_nonneg(y, "emd_general: y");
  if (x.size() != R.R.rows() || y.size() != R.R.rows()) {
    throw std::invalid_argument("emd_general: operand size does not match distance matrix");
  }
  const int n = static_cast<int>(x.size());
  const int k_all = static_cast<int>(R.columns.size());

  EmdValue out;
  out.plan.columns = R.columns;
  out.plan.F = Mat::Zero(n, k_all);

  const double sx = x.sum(), sy = y.sum();
  const double u = std::min(sx, sy);
  out.plan.total_flow = u;
  if (u <= 0.0) return out;  // degenerate: no mass is required to flow

  // Restrict to the supports; zero rows/columns carry no flow.
  std::vector<int> rows;
  for (int i = 0; i < n; ++i) {
    if (x[i] > 0.0) rows.push_back(i);
  }
  std::vector<int> col_pos(n, -1);
  for (int k = 0; k < k_all; ++k) col_pos[R.columns[k]] = k;
  std::vector<int> cols;
  for (int j = 0; j < n; ++j) {
    if (y[j] > 0.0) {
      if (col_pos[j] < 0) {
        throw std::invalid_argument("emd_general: distance matrix lacks a support column");
      }
      cols.push_back(j);
    }
  }

  const int nr = static_cast<int>(rows.size());
  const int nc = static_cast<int>(cols.size());
  auto p = solver::CompositeProgram::sized(nr * nc);
  p.lower.setZero();
  for (int a = 0; a < nr; ++a) {
    for (int bcol = 0; bcol < nc; ++bcol) {
      p.c[a * nc + bcol] = R.R(rows[a], col_pos[cols[bcol]]);
    }
  }
  std::vector<Eigen::Triplet<double>> gt, et;
  for (int a = 0; a < nr; ++a) {
    for (int bcol = 0; bcol < nc; ++bcol) {
      gt.emplace_back(a, a * nc + bcol, 1.0);           // row sums <= x
      gt.emplace_back(nr + bcol, a * nc + bcol, 1.0);   // column sums <= y
      et.emplace_back(0, a * nc + bcol, 1.0);           // total flow
    }
  }
  p.G.resize(nr + nc, p.n);
  p.G.setFromTriplets(gt.begin(), gt.end());
  p.h.resize(nr + nc);
  for (int a = 0; a < nr; ++a) p.h[a] = x[rows[a]];
  for (int bcol = 0; bcol < nc; ++bcol) p.h[nr + bcol] = y[cols[bcol]];
  p.E.resize(1, p.n);
  p.E.setFromTriplets(et.begin(), et.end());
  p.e.resize(1);
  p.e[0] = u;

  const auto rep = solver::solve_lp_exact(p);
  if (rep.status != solver::SolveStatus::optimal) {
    throw std::runtime_error(std::string("emd_general: LP solve failed: ") +
                             solver::to_string(rep.status));
  }
  out.value = rep.objective;
  for (int a = 0; a < nr; ++a) {
    for (int bcol = 0; bcol < nc; ++bcol) {
      const double f = rep.v[a * nc + bcol];
      if (f > 0.0) out.plan.F(rows[a], col_pos[cols[bcol]]) = f;
    }
  }
  return out;
}

int beckmann_variable_count(const GridGeometry& grid) {
  return grid.size() * (grid.ndim() + 2);
}

BeckmannValue emd_beckmann(const Vec& x, const Vec& y, const GridGeometry& grid,
                           const BeckmannOptions& opt) {
  require_nonneg(x, "emd_beckmann: x");
  require_nonneg(y, "emd_beckmann: y");
  const int n = grid.size();
  if (x.size() != n || y.size() != n) {
    throw std::invalid_argument("emd_beckmann: operand size does not match grid");
  }
  const int d = grid.ndim();
  if (d == 2 && grid.spacing()[0] != grid.spacing()[1]) {
    throw std::invalid_argument("emd_beckmann: 2-D grids require uniform spacing");
  }
  const double cell = grid.spacing()[0];
  const double u = std::min(x.sum(), y.sum());

  BeckmannValue out;
  out.flux.flux = Mat::Zero(n, d);
  out.flux.source_slack = Vec::Zero(n);
  out.flux.sink_slack = Vec::Zero(n);
  out.flux.total_flow = u;
  if (u <= 0.0) return out;

  const std::vector<int> step = strides(grid);

  if (d == 1) {
    // Exact LP on the split flux M = p - q.
    // Layout: [p (n), q (n), w (n), v (n)].
    auto p = solver::CompositeProgram::sized(4 * n);
    p.lower.setZero();
    for (int i = 0; i < n; ++i) {
      p.c[i] = cell;
      p.c[n + i] = cell;
      p.upper[2 * n + i] = x[i];
      p.upper[3 * n + i] = y[i];
      if (axis_boundary(grid, i, 0)) p.upper[i] = p.upper[n + i] = 0.0;
    }
    std::vector<Eigen::Triplet<double>> et;
    for (int i = 0; i < n; ++i) {
      et.emplace_back(i, i, 1.0);
      et.emplace_back(i, n + i, -1.0);
      if (i > 0) {
        et.emplace_back(i, i - 1, -1.0);
        et.emplace_back(i, n + i - 1, 1.0);
      }
      et.emplace_back(i, 3 * n + i, 1.0);
      et.emplace_back(i, 2 * n + i, -1.0);
      et.emplace_back(n, 2 * n + i, 1.0);
      et.emplace_back(n + 1, 3 * n + i, 1.0);
    }
    p.E.resize(n + 2, p.n);
    p.E.setFromTriplets(et.begin(), et.end());
    p.e = Vec::Zero(n + 2);
    p.e[n] = u;
    p.e[n + 1] = u;

    const auto rep = solver::solve_lp_exact(p);
    if (rep.status != solver::SolveStatus::optimal) {
      throw std::runtime_error(std::string("emd_beckmann: LP solve failed: ") +
                               solver::to_string(rep.status));
    }
    out.value = rep.objective;
    for (int i = 0; i < n; ++i) {
      out.flux.flux(i, 0) = rep.v[i] - rep.v[n + i];
      out.flux.source_slack[i] = rep.v[2 * n + i];
      out.flux.sink_slack[i] = rep.v[3 * n + i];
    }
    return out;
  }

  // 2-D: grouped-norm program solved by the first-order method.
  // Layout: [m0 (n), m1 (n), w (n), v (n)].
  auto p = solver::CompositeProgram::sized(4 * n);
  for (int i = 0; i < n; ++i) {
    p.upper[2 * n + i] = x[i];
    p.lower[2 * n + i] = 0.0;
    p.upper[3 * n + i] = y[i];
    p.lower[3 * n + i] = 0.0;
  }
  for (int i = 0; i < n; ++i) {
    solver::NormGroup g;
    g.weight = cell;
    for (int a = 0; a < 2; ++a) {
      if (axis_boundary(grid, i, a)) {
        p.lower[a * n + i] = 0.0;
        p.upper[a * n + i] = 0.0;
      } else {
        g.index.push_back(a * n + i);
      }
    }
    if (!g.index.empty()) p.groups.push_back(g);
  }
  std::vector<Eigen::Triplet<double>> et;
  const auto& dims = grid.dims();
  for (int i = 0; i < n; ++i) {
    const std::vector<int> idx = grid.unflatten(i);
    for (int a = 0; a < 2; ++a) {
      et.emplace_back(i, a * n + i, 1.0);
      if (idx[a] > 0) et.emplace_back(i, a * n + i - step[a], -1.0);
    }
    et.emplace_back(i, 3 * n + i, 1.0);
    et.emplace_back(i, 2 * n + i, -1.0);
    et.emplace_back(n, 2 * n + i, 1.0);
    et.emplace_back(n + 1, 3 * n + i, 1.0);
  }
  (void)dims;
  p.E.resize(n + 2, p.n);
  p.E.setFromTriplets(et.begin(), et.end());
  p.e = Vec::Zero(n + 2);
  p.e[n] = u;
  p.e[n + 1] = u;

  solver::SolverOptions sopt;
  sopt.primal_tol = opt.primal_tol;
  sopt.dual_tol = opt.dual_tol;
  sopt.max_iters = opt.max_iters;
  const auto rep = solver::solve(p, sopt);
  if (rep.status != solver::SolveStatus::optimal &&
      rep.status != solver::SolveStatus::max_iter) {
    throw std::runtime_error(std::string("emd_beckmann: solve failed: ") +
                             solver::to_string(rep.status));
  }

  // Project onto the equality set so the reported cost belongs to an exactly
  // feasible flux; a slightly infeasible iterate under-reports the optimum.
  Vec z = rep.v;
  {
    const Vec resid = p.E * z - p.e;
    solver::SpMat eet = (p.E * solver::SpMat(p.E.transpose())).pruned();
    Eigen::SimplicialLDLT<solver::SpMat> ldlt(eet);
    if (ldlt.info() == Eigen::Success) {
      const Vec lambda = ldlt.solve(resid);
      z -= p.E.transpose() * lambda;
      for (int i = 0; i < n; ++i) {
        z[2 * n + i] = std::clamp(z[2 * n + i], 0.0, x[i]);
        z[3 * n + i] = std::clamp(z[3 * n + i], 0.0, y[i]);
      }
    }
  }
  out.value = 0.0;
  for (int i = 0; i < n; ++i) {
    out.flux.flux(i, 0) = z[i];
    out.flux.flux(i, 1) = z[n + i];
    out.flux.source_slack[i] = z[2 * n + i];
    out.flux.sink_slack[i] = z[3 * n + i];
    out.value += cell * std::hypot(z[i], z[n + i]);
  }
  return out;
}

}  // namespace emdflow::transport
