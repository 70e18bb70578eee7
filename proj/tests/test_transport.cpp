#include "emdflow/transport.hpp"

#include "emdflow/synth.hpp"
#include "oracles.hpp"

#include <doctest.h>

using namespace emdflow;
namespace tp = emdflow::transport;

namespace {

std::vector<int> full_support(int n) {
  std::vector<int> s(n);
  for (int i = 0; i < n; ++i) s[i] = i;
  return s;
}

Vec random_nonneg(synth::Rng& rng, int n, double density = 1.0) {
  Vec v = Vec::Zero(n);
  for (int i = 0; i < n; ++i) {
    if (rng.uniform() < density) v[i] = rng.uniform();
  }
  return v;
}

}  // namespace

TEST_SUITE("transport") {

TEST_CASE("euclidean distances on grids") {
  GridGeometry g22({2, 2});
  const auto dm = tp::distance_matrix(g22, full_support(4));
  CHECK(dm.R(0, 3) == doctest::Approx(std::sqrt(2.0)));  // (0,0) to (1,1)
  for (int i = 0; i < 4; ++i) CHECK(dm.R(i, i) == 0.0);

  GridGeometry g4({4});
  const auto dm4 = tp::distance_matrix(g4, full_support(4));
  CHECK(dm4.R(0, 3) == doctest::Approx(3.0));

  CHECK_THROWS_AS(tp::distance_matrix(g4, {}), std::invalid_argument);
  CHECK_THROWS_AS(tp::distance_matrix(g4, {7}), std::out_of_range);
}

TEST_CASE("manhattan metric differs on diagonals") {
  GridGeometry g({3, 3});
  const auto dm = tp::distance_matrix(g, full_support(9), tp::GroundMetric::manhattan);
  CHECK(dm.R(0, 8) == doctest::Approx(4.0));  // (0,0) to (2,2)
}

TEST_CASE("divergence stencil and conservation") {
  GridGeometry g2({2});
  CHECK(tp::divergence(Mat::Zero(2, 1), g2).isZero(0.0));
  Mat m(2, 1);
  m << 1.0, 0.0;
  const Vec div = tp::divergence(m, g2);
  CHECK(div[0] == 1.0);
  CHECK(div[1] == -1.0);

  // Zero-flux boundary makes total divergence vanish for any interior flux.
  synth::Rng rng(3);
  GridGeometry g({4, 5});
  for (int trial = 0; trial < 20; ++trial) {
    Mat flux(g.size(), 2);
    for (int i = 0; i < g.size(); ++i) {
      const auto idx = g.unflatten(i);
      flux(i, 0) = idx[0] == g.dims()[0] - 1 ? 0.0 : rng.gaussian();
      flux(i, 1) = idx[1] == g.dims()[1] - 1 ? 0.0 : rng.gaussian();
    }
    CHECK(tp::divergence(flux, g).sum() == doctest::Approx(0.0).epsilon(1e-12));
  }
  CHECK_THROWS_AS(tp::divergence(Mat::Zero(3, 1), g), std::invalid_argument);
}

TEST_CASE("emd_general small examples") {
  GridGeometry g4({4});
  const auto dm = tp::distance_matrix(g4, full_support(4));

  Vec x(4), y(4);
  x << 0.3, 0.0, 0.7, 0.1;
  CHECK(tp::emd_general(x, x, dm).value == doctest::Approx(0.0));

  x << 1, 0, 0, 0;
  y << 0, 0, 0, 1;
  const auto r = tp::emd_general(x, y, dm);
  CHECK(r.value == doctest::Approx(3.0));
  CHECK(r.plan.total_flow == doctest::Approx(1.0));

  GridGeometry g2({2});
  Vec x2(2), y2(2);
  x2 << 2, 0;
  y2 << 0, 1;
  const auto partial = tp::emd_general(x2, y2, tp::distance_matrix(g2, full_support(2)));
  CHECK(partial.value == doctest::Approx(1.0));  // only the min mass flows
  CHECK(partial.plan.total_flow == doctest::Approx(1.0));

  // Degenerate zero operands.
  CHECK(tp::emd_general(Vec::Zero(2), Vec::Zero(2), tp::distance_matrix(g2, full_support(2))).value ==
        0.0);
}

TEST_CASE("emd_general matches the transportation simplex oracle") {
  synth::Rng rng(17);
  GridGeometry g5({5});
  const auto dm = tp::distance_matrix(g5, full_support(5));
  for (int trial = 0; trial < 25; ++trial) {
    const Vec x = random_nonneg(rng, 5, 0.8);
    const Vec y = random_nonneg(rng, 5, 0.8);
    if (x.sum() == 0.0 || y.sum() == 0.0) continue;
    const double lp = tp::emd_general(x, y, dm).value;
    const double oracle = test_oracles::transport_simplex(x, y, dm.R);
    CHECK(lp == doctest::Approx(oracle).epsilon(1e-8));
  }
}

TEST_CASE("emd properties: symmetry, scaling, mass law") {
  synth::Rng rng(19);
  GridGeometry g({3, 3});
  const auto dm = tp::distance_matrix(g, full_support(9));
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x = random_nonneg(rng, 9);
    const Vec y = random_nonneg(rng, 9);
    const auto xy = tp::emd_general(x, y, dm);
    const auto yx = tp::emd_general(y, x, dm);  // symmetric full R
    CHECK(xy.value == doctest::Approx(yx.value).epsilon(1e-9));
    CHECK(xy.plan.total_flow == doctest::Approx(std::min(x.sum(), y.sum())).epsilon(1e-9));
    const double alpha = 0.25 + rng.uniform();
    CHECK(tp::emd_general(alpha * x, alpha * y, dm).value ==
          doctest::Approx(alpha * xy.value).epsilon(1e-9));
    CHECK(xy.value >= 0.0);
  }
}

TEST_CASE("unit translation costs the step count") {
  GridGeometry g({8});
  const auto dm = tp::distance_matrix(g, full_support(8));
  for (int k = 1; k < 8; ++k) {
    Vec x = Vec::Zero(8), y = Vec::Zero(8);
    x[0] = 1.0;
    y[k] = 1.0;
    CHECK(tp::emd_general(x, y, dm).value == doctest::Approx(static_cast<double>(k)));
  }
}

TEST_CASE("emd_1d_oracle: examples and agreement with the LP") {
  Vec x(3), y(3);
  x << 1, 0, 0;
  y << 0, 0, 1;
  CHECK(tp::emd_1d_oracle(x, x) == 0.0);
  CHECK(tp::emd_1d_oracle(x, y) == doctest::Approx(2.0));
  CHECK_THROWS_AS(tp::emd_1d_oracle(x, 2.0 * y), std::invalid_argument);

  synth::Rng rng(29);
  GridGeometry g12({12});
  const auto dm = tp::distance_matrix(g12, full_support(12));
  for (int trial = 0; trial < 15; ++trial) {
    Vec a = random_nonneg(rng, 12);
    Vec b = random_nonneg(rng, 12);
    a /= a.sum();
    b /= b.sum();
    CHECK(tp::emd_1d_oracle(a, b) == doctest::Approx(tp::emd_general(a, b, dm).value).epsilon(1e-10));
  }
}

TEST_CASE("beckmann 1-D is exact") {
  GridGeometry g2({2});
  Vec x(2), y(2);
  x << 1, 0;
  y << 0, 1;
  const auto r = tp::emd_beckmann(x, y, g2);
  CHECK(r.value == doctest::Approx(1.0));
  CHECK(r.flux.flux(0, 0) == doctest::Approx(1.0));

  // Unequal masses: only the min mass flows, slacks report it.
  Vec x2(2), y2(2);
  x2 << 2, 0;
  y2 << 0, 1;
  const auto p = tp::emd_beckmann(x2, y2, g2);
  CHECK(p.value == doctest::Approx(1.0));
  CHECK(p.flux.source_slack[0] == doctest::Approx(1.0));
  CHECK(p.flux.source_slack[1] == doctest::Approx(0.0));
  CHECK(p.flux.sink_slack[1] == doctest::Approx(1.0));
  CHECK(p.flux.total_flow == doctest::Approx(1.0));

  synth::Rng rng(37);
  GridGeometry g16({16}, {0.5});
  for (int trial = 0; trial < 15; ++trial) {
    Vec a = random_nonneg(rng, 16);
    Vec b = random_nonneg(rng, 16);
    a /= a.sum();
    b /= b.sum();
    CHECK(tp::emd_beckmann(a, b, g16).value ==
          doctest::Approx(tp::emd_1d_oracle(a, b, 0.5)).epsilon(1e-6));
  }
}

TEST_CASE("beckmann equal-mass slacks saturate") {
  synth::Rng rng(41);
  GridGeometry g8({8});
  Vec a = random_nonneg(rng, 8);
  Vec b = random_nonneg(rng, 8);
  b *= a.sum() / b.sum();
  const auto r = tp::emd_beckmann(a, b, g8);
  CHECK((r.flux.source_slack - a).cwiseAbs().maxCoeff() < 1e-7);
  CHECK((r.flux.sink_slack - b).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("beckmann 2-D diagonal lies between euclidean and manhattan") {
  GridGeometry g({3, 3});
  Vec x = Vec::Zero(9), y = Vec::Zero(9);
  x[0] = 1.0;  // (0,0)
  y[8] = 1.0;  // (2,2)
  const auto r = tp::emd_beckmann(x, y, g);
  CHECK(r.value >= 2.0 * std::sqrt(2.0) - 1e-6);
  CHECK(r.value <= 4.0 + 1e-6);
  const double euclid = tp::emd_general(x, y, tp::distance_matrix(g, full_support(9))).value;
  CHECK(euclid == doctest::Approx(2.0 * std::sqrt(2.0)));
  CHECK(r.value >= euclid - 1e-6);

  CHECK(tp::beckmann_variable_count(g) == 9 * 4);  // N(D+2)
}

TEST_CASE("sparse column reduction preserves the optimum") {
  Vec pred(4);
  pred << 0, 2, 0, 1;
  CHECK(tp::sparse_column_reduction(pred) == std::vector<int>{1, 3});
  CHECK(tp::sparse_column_reduction(Vec::Zero(3)).empty());

  synth::Rng rng(43);
  GridGeometry g({10});
  for (int trial = 0; trial < 10; ++trial) {
    const Vec x = random_nonneg(rng, 10);
    const Vec y = random_nonneg(rng, 10, 0.3);
    if (y.sum() == 0.0) continue;
    const auto full = tp::emd_general(x, y, tp::distance_matrix(g, full_support(10)));
    const auto reduced =
        tp::emd_general(x, y, tp::distance_matrix(g, tp::sparse_column_reduction(y)));
    CHECK(full.value == doctest::Approx(reduced.value).epsilon(1e-8));
  }
}

}  // TEST_SUITE
