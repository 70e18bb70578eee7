#pragma once

#include "emdflow/core.hpp"
#include "emdflow/solver.hpp"

// Independent reference implementations used only by tests. These share no
// code with the production solve paths they check.
namespace emdflow::test_oracles {

/// Exact partial-transport EMD via the classical transportation simplex on
/// the balanced augmentation (a zero-cost virtual row/column absorbs the
/// mass imbalance).
double transport_simplex(const Vec& x, const Vec& y, const Mat& cost);

/// Exact LP minimum by enumerating basic feasible points of
/// min c'v s.t. Ev = e, Gv <= h, l <= v <= u. Tiny instances only.
/// Throws std::runtime_error when no feasible vertex exists.
double vertex_enumeration_lp(const solver::CompositeProgram& p);

}  // namespace emdflow::test_oracles
