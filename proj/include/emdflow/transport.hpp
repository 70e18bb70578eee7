#pragma once

#include "emdflow/core.hpp"
#include "emdflow/solver.hpp"

#include <vector>

namespace emdflow::transport {

enum class GroundMetric { euclidean, manhattan };

/// Pairwise ground costs R(i, k) = d(c_i, c_{columns[k]}) between every grid
/// cell and the retained support columns.
struct DistanceMatrix {
  Mat R;
  std::vector<int> columns;
};

DistanceMatrix distance_matrix(const GridGeometry& grid, const std::vector<int>& support,
                               GroundMetric metric = GroundMetric::euclidean);

/// Support of the prediction; flow columns outside it are structurally zero.
std::vector<int> sparse_column_reduction(const Vec& prediction);

/// Discrete divergence of a per-cell flux field (N x D) with zero-flux
/// boundary references.
Vec divergence(const Mat& flux, const GridGeometry& grid);

/// Closed-form 1-D equal-mass Wasserstein-1: ||cumsum(x) - cumsum(y)||_1 * spacing.
double emd_1d_oracle(const Vec& x, const Vec& y, double spacing = 1.0, double mass_tol = 1e-8);

struct FlowPlan {
  Mat F;  // N x K over DistanceMatrix columns
  std::vector<int> columns;
  double total_flow = 0.0;
};

struct EmdValue {
  double value = 0.0;
  FlowPlan plan;
};

/// Partial-transport EMD as an exact linear program over flow variables.
EmdValue emd_general(const Vec& x, const Vec& y, const DistanceMatrix& R);

struct FluxField {
  Mat flux;          // N x D, axis-boundary components pinned to zero
  Vec source_slack;  // w, 0 <= w <= x
  Vec sink_slack;    // v, 0 <= v <= y
  double total_flow = 0.0;
};

struct BeckmannValue {
  double value = 0.0;
  FluxField flux;
};

struct BeckmannOptions {
  double primal_tol = 1e-10;
  double dual_tol = 1e-10;
  int max_iters = 400000;
};

/// Minimal-flux (Beckmann) EMD with source/sink slacks for unequal masses.
/// 1-D grids solve exactly via the LP backend; 2-D grids use the first-order
/// solver on the grouped-norm program.
BeckmannValue emd_beckmann(const Vec& x, const Vec& y, const GridGeometry& grid,
                           const BeckmannOptions& opt = {});

/// Number of decision variables of the Beckmann program: N(D+2).
int beckmann_variable_count(const GridGeometry& grid);

}  // namespace emdflow::transport
