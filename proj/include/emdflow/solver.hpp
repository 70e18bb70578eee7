#pragma once

#include "emdflow/core.hpp"

#include <Eigen/Sparse>

#include <optional>
#include <string>
#include <vector>

namespace emdflow::solver {

using SpMat = Eigen::SparseMatrix<double>;

/// A group of variable indices penalized jointly by weight * ||v_g||_2.
struct NormGroup {
  std::vector<int> index;
  double weight = 0.0;
};

/// Canonical convex composite program. Every tracker objective compiles to
///
///   min  1/2 ||b - H v||^2 + c'v + sum_i w_i |v_i| + sum_g rho_g ||v_g||_2
///   s.t. E v = e,  G v <= h,  lower <= v <= upper.
///
/// Norm-group members must not carry l1 weight and must be either unbounded
/// or pinned to zero (used for zero-flux boundary components).
struct CompositeProgram {
  int n = 0;
  SpMat H;
  Vec b;
  Vec c;
  Vec l1_weights;
  std::vector<NormGroup> groups;
  SpMat E;
  Vec e;
  SpMat G;
  Vec h;
  Vec lower, upper;

  static CompositeProgram sized(int n_vars);
  void validate() const;
  double objective(const Vec& v) const;
};

enum class SolveStatus { optimal, max_iter, infeasible, unbounded };
const char* to_string(SolveStatus s);

struct SolverOptions {
  double primal_tol = 1e-6;
  double dual_tol = 1e-6;
  int max_iters = 50000;
  int check_every = 25;
  double dual_scale = 1.0;
  bool record_merit = false;
  std::optional<Vec> warm_v;
  std::optional<Vec> warm_y;
};

struct SolveReport {
  Vec v;
  Vec y;  // duals over the stacked rows of [E; G]; G-part is nonnegative
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
  SolveStatus status = SolveStatus::optimal;
  std::vector<double> merit;  // per-iteration step norm in the solver metric
};

/// First-order primal-dual solve of the composite program. Deterministic
/// for fixed inputs; supports warm starts via SolverOptions.
SolveReport solve(const CompositeProgram& p, const SolverOptions& opt = {});

/// Exact simplex solve for programs without quadratic or norm-group terms.
/// l1 weights are linearized internally (sign split where bounds straddle 0).
SolveReport solve_lp_exact(const CompositeProgram& p, double tol = 1e-9);

/// Subgradient-based optimality residuals at a candidate primal-dual pair.
/// l1/bound terms are measured by a prox fixed-point residual, norm groups by
/// the dual-norm condition on zero groups.
struct KktResiduals {
  double stationarity = 0.0;
  double primal = 0.0;
  double dual_sign = 0.0;        // violation of y_G >= 0
  double complementarity = 0.0;  // |y_G . (Gv - h)| scaled
  double max_all() const;
};
KktResiduals kkt_residuals(const CompositeProgram& p, const Vec& v, const Vec& y);

/// Flat record of a solve for serialization by the bench harness.
struct ReportRecord {
  std::string status;
  double objective = 0.0;
  double primal_residual = 0.0;
  double dual_residual = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
};
ReportRecord compile_report(const SolveReport& r);

}  // namespace emdflow::solver
