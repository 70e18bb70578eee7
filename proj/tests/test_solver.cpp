#include "emdflow/solver.hpp"

#include "emdflow/synth.hpp"
#include "oracles.hpp"
#include "test_util.hpp"

#include <doctest.h>

#include <cstring>

using namespace emdflow;
using solver::CompositeProgram;
using solver::SolveStatus;
using solver::SolverOptions;
using test_util::make_sparse;

namespace {

SolverOptions tight() {
  SolverOptions opt;
  opt.primal_tol = 1e-9;
  opt.dual_tol = 1e-9;
  opt.max_iters = 200000;
  return opt;
}

}  // namespace

TEST_SUITE("solver") {

TEST_CASE("scalar soft threshold: min 1/2 (2 - v)^2 + |v|") {
  auto p = CompositeProgram::sized(1);
  Mat h(1, 1);
  h << 1.0;
  p.H = make_sparse(h);
  p.b = Vec::Constant(1, 2.0);
  p.l1_weights = Vec::Constant(1, 1.0);
  const auto rep = solver::solve(p, tight());
  CHECK(rep.status == SolveStatus::optimal);
  CHECK(rep.v[0] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("scalar ridge stationarity: min 1/2 (1 - v)^2 + 2*0.5*v^2") {
  auto p = CompositeProgram::sized(1);
  Mat h(2, 1);
  h << 1.0, 1.0;  // second row encodes sqrt(2*gamma) = 1
  p.H = make_sparse(h);
  p.b = Vec::Zero(2);
  p.b[0] = 1.0;
  const auto rep = solver::solve(p, tight());
  CHECK(rep.v[0] == doctest::Approx(0.5).epsilon(1e-7));
}

TEST_CASE("random small LPs match the vertex enumeration oracle") {
  synth::Rng rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 3 + rng.uniform_int(4);  // 3..6 variables
    const int me = rng.uniform_int(2);
    const int mg = 1 + rng.uniform_int(4);
    auto p = test_util::random_lp(rng, n, me, mg);
    const double oracle = test_oracles::vertex_enumeration_lp(p);
    const auto fo = solver::solve(p, tight());
    REQUIRE(fo.status == SolveStatus::optimal);
    CHECK(fo.objective == doctest::Approx(oracle).epsilon(1e-6));
    const auto lp = solver::solve_lp_exact(p);
    REQUIRE(lp.status == SolveStatus::optimal);
    CHECK(lp.objective == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("cross-backend agreement on LPs with l1 terms") {
  synth::Rng rng(23);
  for (int trial = 0; trial < 15; ++trial) {
    const int n = 4 + rng.uniform_int(10);
    auto p = test_util::random_lp(rng, n, rng.uniform_int(3), 2 + rng.uniform_int(4), true);
    const auto fo = solver::solve(p, tight());
    const auto lp = solver::solve_lp_exact(p);
    REQUIRE(fo.status == SolveStatus::optimal);
    REQUIRE(lp.status == SolveStatus::optimal);
    CHECK(fo.objective ==
          doctest::Approx(lp.objective).epsilon(1e-6).scale(1.0 + std::abs(lp.objective)));
  }
}

TEST_CASE("kkt residuals hold at reported solutions") {
  synth::Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    auto p = test_util::random_composite(rng, 6 + rng.uniform_int(6), rng.uniform_int(2),
                                         1 + rng.uniform_int(3), 4);
    const auto rep = solver::solve(p, tight());
    REQUIRE(rep.status == SolveStatus::optimal);
    const auto kkt = solver::kkt_residuals(p, rep.v, rep.y);
    CHECK(kkt.max_all() < 1e-6);
  }
}

TEST_CASE("norm groups: zero groups satisfy the dual-norm condition") {
  // min ||v|| * 3 + 1/2 ||v - b||^2 with small b keeps the group at zero.
  auto p = CompositeProgram::sized(2);
  Mat h = Mat::Identity(2, 2);
  p.H = make_sparse(h);
  p.b = Vec::Constant(2, 0.5);
  p.groups.push_back({{0, 1}, 3.0});
  auto rep = solver::solve(p, tight());
  CHECK(rep.v.norm() < 1e-8);  // ||grad|| = ||b|| < weight
  const auto kkt = solver::kkt_residuals(p, rep.v, rep.y);
  CHECK(kkt.max_all() < 1e-6);

  // Larger data activates the group with the expected shrinkage.
  p.b = Vec::Constant(2, 4.0);
  rep = solver::solve(p, tight());
  const double expect = 4.0 - 3.0 / std::sqrt(2.0);  // block soft threshold
  CHECK(rep.v[0] == doctest::Approx(expect).epsilon(1e-6));
  CHECK(rep.v[1] == doctest::Approx(expect).epsilon(1e-6));
}

TEST_CASE("determinism: identical inputs give bitwise-identical reports") {
  synth::Rng rng(47);
  auto p = test_util::random_composite(rng, 12, 2, 4, 6);
  SolverOptions opt = tight();
  const auto r1 = solver::solve(p, opt);
  const auto r2 = solver::solve(p, opt);
  REQUIRE(r1.v.size() == r2.v.size());
  CHECK(std::memcmp(r1.v.data(), r2.v.data(), sizeof(double) * r1.v.size()) == 0);
  CHECK(std::memcmp(r1.y.data(), r2.y.data(), sizeof(double) * r1.y.size()) == 0);
  CHECK(r1.iterations == r2.iterations);
  CHECK(r1.objective == r2.objective);
}

TEST_CASE("merit trace is non-increasing within jitter") {
  synth::Rng rng(53);
  auto p = test_util::random_composite(rng, 15, 2, 5, 8);
  SolverOptions opt;
  opt.primal_tol = 1e-10;
  opt.dual_tol = 1e-10;
  opt.max_iters = 20000;
  opt.record_merit = true;
  const auto rep = solver::solve(p, opt);
  REQUIRE(rep.merit.size() > 10);
  const double scale = std::max(1.0, rep.merit.front());
  for (size_t k = 1; k < rep.merit.size(); ++k) {
    CHECK(rep.merit[k] <= rep.merit[k - 1] + 1e-12 * scale);
  }
}

TEST_CASE("warm starts preserve the optimum") {
  synth::Rng rng(61);
  auto p = test_util::random_composite(rng, 10, 1, 3, 5);
  const auto cold = solver::solve(p, tight());
  SolverOptions warm = tight();
  warm.warm_v = cold.v;
  warm.warm_y = cold.y;
  const auto again = solver::solve(p, warm);
  CHECK(again.iterations <= cold.iterations);
  CHECK(again.objective == doctest::Approx(cold.objective).epsilon(1e-7));
}

TEST_CASE("infeasible and unbounded detection") {
  // Statically infeasible box: v >= 1 and v <= 0.
  auto p = CompositeProgram::sized(1);
  p.lower[0] = 1.0;
  p.upper[0] = 0.0;
  CHECK(solver::solve(p).status == SolveStatus::infeasible);
  CHECK(solver::compile_report(solver::solve(p)).status == "infeasible");

  // Same box conflict expressed as inequality rows, exact backend.
  auto q = CompositeProgram::sized(1);
  Mat g(2, 1);
  g << -1.0, 1.0;  // -v <= -1 and v <= 0
  q.G = make_sparse(g);
  q.h = Vec(2);
  q.h << -1.0, 0.0;
  CHECK(solver::solve_lp_exact(q).status == SolveStatus::infeasible);

  // Unbounded: min -v with v >= 0.
  auto r = CompositeProgram::sized(1);
  r.c[0] = -1.0;
  r.lower[0] = 0.0;
  CHECK(solver::solve_lp_exact(r).status == SolveStatus::unbounded);
  CHECK(solver::solve(r).status == SolveStatus::unbounded);
}

TEST_CASE("iteration cap returns max_iter status") {
  synth::Rng rng(71);
  auto p = test_util::random_composite(rng, 20, 3, 6, 10);
  SolverOptions opt;
  opt.primal_tol = 1e-14;
  opt.dual_tol = 1e-14;
  opt.max_iters = 10;
  const auto rep = solver::solve(p, opt);
  CHECK(rep.status == SolveStatus::max_iter);
  CHECK(rep.iterations == 10);
  CHECK(solver::compile_report(rep).status == "max_iter");
}

TEST_CASE("compile_report carries the optimal status") {
  auto p = CompositeProgram::sized(1);
  p.l1_weights[0] = 1.0;
  Mat h(1, 1);
  h << 1.0;
  p.H = make_sparse(h);
  p.b = Vec::Constant(1, 2.0);
  const auto rec = solver::compile_report(solver::solve(p, tight()));
  CHECK(rec.status == "optimal");
  CHECK(rec.iterations > 0);
}

}  // TEST_SUITE
