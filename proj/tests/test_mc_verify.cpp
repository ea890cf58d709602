#include <doctest.h>

#include <random>

#include "mcsense/mc_verify.hpp"
#include "mcsense/sensitivities.hpp"
#include "mcsense/stationary.hpp"
#include "support/random_chains.hpp"

using namespace mcsense;
namespace mt = mcsense::testing;

namespace {

SubstochasticMatrix<double> ring_envelope() {
  return validate_substochastic<double>((2.0 / 3.0) * mt::ring3().matrix(),
                                        1e-12);
}

}  // namespace

TEST_CASE("estimate_q lands near the deterministic value") {
  const auto s = ring_envelope();
  const auto est = estimate_q(s, 0, 1, 100000, 42);
  const double exact = 2.0 / 7.0;
  CHECK(std::abs(est.point - exact) <= 4.0 * est.stderr_);
  CHECK(est.stderr_ ==
        doctest::Approx(std::sqrt(est.point * (1 - est.point) / 1e5)));
  CHECK(est.n == 100000);
  CHECK(est.seed == 42);
}

TEST_CASE("fixed seed gives bitwise-identical estimates; threads do not matter") {
  const auto s = ring_envelope();
  const auto a = estimate_q(s, 0, 1, 20000, 7, 1);
  const auto b = estimate_q(s, 0, 1, 20000, 7, 1);
  const auto c = estimate_q(s, 0, 1, 20000, 7, 4);
  CHECK(a.point == b.point);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(a.point == c.point);
  CHECK(a.stderr_ == c.stderr_);

  const auto d = estimate_q(s, 0, 1, 20000, 8, 1);
  CHECK(a.point != d.point);  // different seed, different sample
}

TEST_CASE("impossible events estimate to exactly zero") {
  // 1 -> 3 -> 3 -> ... : state 2 is unreachable from 1 without absorbing
  DenseMatrix<double> m = DenseMatrix<double>::Zero(3, 3);
  m(0, 2) = 1.0;
  m(2, 2) = 0.4;  // leaks to omega, so trajectories end
  const auto s = validate_substochastic(m, 1e-12);
  const auto est = estimate_q(s, 0, 1, 5000, 3);
  CHECK(est.point == 0.0);
  CHECK(est.stderr_ == 0.0);
}

TEST_CASE("estimate_occupation matches the geometric holding time") {
  const auto f = mt::two_state(0.2, 0.3);
  const auto est = estimate_occupation(f, 1, 0, 1, 100000, 2024);
  CHECK(std::abs(est.point - 10.0 / 3.0) <= 4.0 * est.stderr_);

  // counting the target itself gives zero
  const auto zero = estimate_occupation(f, 1, 0, 0, 1000, 2024);
  CHECK(zero.point == 0.0);
}

TEST_CASE("occupation estimates agree with the deterministic matrix") {
  std::mt19937_64 rng(9);
  const auto f = mt::random_stochastic(rng, 5);
  const auto occ = occupation_matrix(f, 2);
  for (Index j : {0, 1, 3}) {
    for (Index m : {0, 3, 4}) {
      const auto est = estimate_occupation(f, j, 2, m, 60000, 99);
      const double exact = occ.n(occ.from_parent(j), occ.from_parent(m));
      CAPTURE(j);
      CAPTURE(m);
      CHECK(std::abs(est.point - exact) <= 4.0 * std::max(est.stderr_, 1e-12));
    }
  }
}

TEST_CASE("decomposition identity holds within confidence intervals") {
  const auto f = mt::two_state(0.2, 0.3);
  const auto [lhs, rhs] = check_decomposition(f, 0, 1, 100000, 11);
  const double exact = 0.2 * (10.0 / 3.0);  // = 2/3
  CHECK(std::abs(lhs.point - exact) <= 4.0 * lhs.stderr_);
  CHECK(std::abs(rhs.point - exact) <= 4.0 * rhs.stderr_);
  const double combined =
      std::sqrt(lhs.stderr_ * lhs.stderr_ + rhs.stderr_ * rhs.stderr_);
  CHECK(std::abs(lhs.point - rhs.point) <= 4.0 * combined);
}

TEST_CASE("meta-test: 4-sigma coverage in 100 seeded replications") {
  const auto s = ring_envelope();
  const double exact = 2.0 / 7.0;
  int inside = 0;
  for (std::uint64_t seed = 1; seed <= 100; ++seed) {
    const auto est = estimate_q(s, 0, 1, 20000, seed);
    if (std::abs(est.point - exact) <= 4.0 * est.stderr_) ++inside;
  }
  CHECK(inside >= 99);
}

TEST_CASE("argument validation") {
  const auto s = ring_envelope();
  try {
    estimate_q(s, 0, 1, 0, 1);
    FAIL("expected ZeroSamples");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ZeroSamples);
  }
  try {
    estimate_q(s, 1, 1, 10, 1);
    FAIL("expected SameIndex");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SameIndex);
  }
  const auto f = mt::two_state(0.2, 0.3);
  CHECK_THROWS_AS(check_decomposition(f, 1, 1, 10, 1), Error);
}

TEST_CASE("runaway trajectories trip the step cap") {
  // from state 1 the walk reaches 3 and loops there forever: no absorption,
  // never hits 2, never returns to 1
  DenseMatrix<double> m = DenseMatrix<double>::Zero(3, 3);
  m(0, 2) = 1.0;
  m(2, 2) = 1.0;
  const auto s = validate_substochastic(m, 1e-12);
  try {
    estimate_q(s, 0, 1, 1, 5);
    FAIL("expected CapExceeded");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::CapExceeded);
  }
}

TEST_CASE("augmented chain absorbs exactly the missing row mass") {
  const auto s = ring_envelope();
  const auto chain = AugmentedChain<double>::from(s);
  for (Index i = 0; i < 3; ++i)
    CHECK(chain.absorb_prob[i] == doctest::Approx(1.0 / 3.0).epsilon(1e-14));

  const auto f_chain = AugmentedChain<double>::from(mt::two_state(0.2, 0.3));
  CHECK(f_chain.absorb_prob.maxCoeff() == 0.0);
  CHECK(f_chain.cumulative(0, 1) == 1.0);
}
