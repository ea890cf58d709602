#include <doctest.h>

#include <random>

#include "mcsense/derivatives.hpp"
#include "support/oracles.hpp"
#include "support/random_chains.hpp"

using namespace mcsense;
namespace mt = mcsense::testing;

TEST_CASE("two-state derivative slice, hand-computed") {
  const auto f = mt::two_state(0.2, 0.3);
  const auto slice = derivative_slice(f, 0, 1);
  CHECK(slice.dpi[0] == doctest::Approx(-1.2).epsilon(1e-12));
  CHECK(slice.dpi[1] == doctest::Approx(1.2).epsilon(1e-12));
  CHECK(slice.dlogpi[0] == doctest::Approx(-2.0).epsilon(1e-12));
  CHECK(slice.dlogpi[1] == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(slice.max_val - slice.min_val == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(slice.argmin == 0);
  CHECK(slice.argmax == 1);
}

TEST_CASE("derivative slices sum to zero and agree with their extrema") {
  std::mt19937_64 rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + Index(rng() % 29);  // L <= 30
    const auto f = mt::random_stochastic(rng, n);
    const auto dist = stationary_distribution(f);
    for (int rep = 0; rep < 3; ++rep) {
      const Index i = Index(rng() % std::uint64_t(n));
      Index j = Index(rng() % std::uint64_t(n));
      if (j == i) j = (j + 1) % n;
      const auto occ = occupation_matrix(f, i);
      const auto slice = derivative_slice(f, dist, occ, i, j);
      CHECK(std::abs(slice.dpi.sum()) <= 1e-10);
      // array consistency: the formulas and the vector extremes coincide
      Index argmin = 0, argmax = 0;
      slice.dlogpi.minCoeff(&argmin);
      slice.dlogpi.maxCoeff(&argmax);
      CHECK(slice.dlogpi[argmin] == doctest::Approx(slice.min_val).epsilon(1e-10));
      CHECK(slice.dlogpi[argmax] == doctest::Approx(slice.max_val).epsilon(1e-10));
      CHECK(slice.dlogpi[i] == doctest::Approx(slice.min_val).epsilon(1e-12));
      CHECK(slice.dlogpi[j] == doctest::Approx(slice.max_val).epsilon(1e-12));
    }
  }
}

TEST_CASE("extremal identity: spread of the log derivative is 1/P") {
  std::mt19937_64 rng(27);
  for (int trial = 0; trial < 6; ++trial) {
    const Index n = 2 + Index(rng() % 9);
    const auto f = mt::random_stochastic(rng, n);
    for (Index i = 0; i < n; ++i) {
      const auto stats = passage_stats(f, i);
      for (Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const auto slice = derivative_slice(f, i, j);
        const double spread = slice.max_val - slice.min_val;
        const double inv_p = 1.0 / stats.hit_before_return[j];
        CHECK(std::abs(spread - inv_p) <= 1e-10 * std::max(1.0, inv_p));
      }
    }
  }
}

TEST_CASE("finite differences confirm the occupation-time formula") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 10; ++trial) {
    const Index n = 2 + Index(rng() % 9);  // L <= 10
    const auto f = mt::random_stochastic(rng, n);  // entries >= 0.05/L > 2 eps
    const Index i = Index(rng() % std::uint64_t(n));
    Index j = Index(rng() % std::uint64_t(n));
    if (j == i) j = (j + 1) % n;
    const auto slice = derivative_slice(f, i, j);
    const auto fd = mt::fd_stationary_derivative(f, i, j, 1e-6);
    const double scale = slice.dpi.cwiseAbs().maxCoeff();
    CHECK((slice.dpi - fd).cwiseAbs().maxCoeff() <= 1e-5 * std::max(scale, 1e-3));
  }
}

TEST_CASE("log-derivative sandwich and the easy entrywise bound") {
  const auto f = mt::two_state(0.2, 0.3);
  const auto [lo, hi] = logderiv_bounds(f, 0, 1);
  CHECK(lo == doctest::Approx(2.5).epsilon(1e-12));
  CHECK(hi == doctest::Approx(5.0).epsilon(1e-12));
  const auto slice = derivative_slice(f, 0, 1);
  const double observed = slice.dlogpi.cwiseAbs().maxCoeff();
  CHECK(observed >= lo - 1e-12);
  CHECK(observed <= hi + 1e-12);

  const auto ring = mt::ring3();
  const auto [rlo, rhi] = logderiv_bounds(ring, 0, 1);
  CHECK(rlo == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rhi == doctest::Approx(2.0).epsilon(1e-12));

  // whenever F_ij > 0 the upper bound is at most 1/F_ij
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 5; ++trial) {
    const Index n = 2 + Index(rng() % 7);
    const auto g = mt::random_stochastic(rng, n);
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const auto [unused, upper] = logderiv_bounds(g, i, j);
        CHECK(upper <= 1.0 / g.matrix()(i, j) + 1e-12);
      }
  }
}

TEST_CASE("same-index request is rejected") {
  const auto f = mt::two_state(0.2, 0.3);
  try {
    derivative_slice(f, 1, 1);
    FAIL("expected SameIndex");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SameIndex);
  }
  CHECK_THROWS_AS(logderiv_bounds(f, 0, 0), Error);
}
