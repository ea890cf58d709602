#include <doctest.h>

#include <cmath>
#include <random>

#include "mcsense/bounds.hpp"
#include "support/random_chains.hpp"

using namespace mcsense;
namespace mt = mcsense::testing;

namespace {

const double kTwoStateComponentError = std::log(26.0 / 25.0);  // state 1
const double kTwoStateMaxError = std::log(55.0 / 52.0);        // state 2

StochasticMatrix<double> fixture_f() { return mt::two_state(0.2, 0.3); }
StochasticMatrix<double> fixture_ft() { return mt::two_state(0.22, 0.3); }

}  // namespace

TEST_CASE("lower envelope arithmetic") {
  const auto ft = fixture_f();
  DenseMatrix<double> alpha = DenseMatrix<double>::Constant(2, 2, 0.05);
  const auto s = lower_envelope(ft, alpha);
  DenseMatrix<double> expect(2, 2);
  expect << 0.75, 0.15, 0.25, 0.65;
  CHECK((s.matrix() - expect).cwiseAbs().maxCoeff() <= 1e-15);
  CHECK(s.irreducible());

  const DenseMatrix<double> zero_budget = DenseMatrix<double>::Zero(2, 2);
  const auto identity_envelope = lower_envelope(ft, zero_budget);
  CHECK((identity_envelope.matrix() - ft.matrix()).cwiseAbs().maxCoeff() == 0.0);

  DenseMatrix<double> kill = DenseMatrix<double>::Zero(2, 2);
  kill(0, 1) = 1.0;
  const auto cut = lower_envelope(ft, kill);
  CHECK(cut.matrix()(0, 1) == 0.0);
  CHECK_FALSE(cut.irreducible());
}

TEST_CASE("true relative error of the analytic pair") {
  CHECK(true_relative_error(fixture_f(), fixture_f()) <= 1e-14);
  const double err = true_relative_error(fixture_f(), fixture_ft());
  CHECK(err == doctest::Approx(kTwoStateMaxError).epsilon(1e-10));
  // the state-1 component is the smaller one
  const auto pf = stationary_distribution(fixture_f()).pi;
  const auto pt = stationary_distribution(fixture_ft()).pi;
  CHECK(std::abs(std::log(pt[0]) - std::log(pf[0])) ==
        doctest::Approx(kTwoStateComponentError).epsilon(1e-10));
}

TEST_CASE("log-form and linear-form bounds on the analytic pair") {
  const auto f = fixture_f();
  const auto ft = fixture_ft();
  const auto s = validate_substochastic<double>(
      f.matrix().cwiseMin(ft.matrix()), 0.0);
  const auto q = q_all_fast(s);
  CHECK(q.value(0, 1) == doctest::Approx(0.2).epsilon(1e-12));

  const double log_form = bound_log_form(f, ft, s, q);
  const double linear_form = bound_linear_form(f, ft, q);
  CHECK(log_form == doctest::Approx(std::log(1.1)).epsilon(1e-12));
  CHECK(linear_form == doctest::Approx(0.1).epsilon(1e-12));

  const double true_err = true_relative_error(f, ft);
  CHECK(true_err <= log_form + 1e-12);
  CHECK(log_form <= linear_form + 1e-12);

  CHECK(bound_log_form(f, f, s, q) == 0.0);
}

TEST_CASE("ordering chain on random dominated triples") {
  std::mt19937_64 rng(31415);
  for (int trial = 0; trial < 40; ++trial) {
    const Index n = 2 + Index(rng() % 19);  // L <= 20
    const auto s = mt::random_substochastic(rng, n);
    const auto f = mt::random_completion(rng, s);
    const auto ft = mt::random_completion(rng, s);
    const auto q = q_all_fast(s);
    const double te = true_relative_error(f, ft);
    const double lf = bound_log_form(f, ft, s, q);
    const double lin = bound_linear_form(f, ft, q);
    CAPTURE(n);
    CHECK(te <= lf + 1e-12);
    CHECK(lf <= lin + 1e-12);
  }
}

TEST_CASE("bound evaluation guards") {
  const auto f = fixture_f();
  const auto ft = fixture_ft();
  const auto s =
      validate_substochastic<double>(0.5 * f.matrix(), 1e-12);
  const auto q = q_all_fast(s);

  // F below S: domination violated
  const auto s_big = validate_substochastic<double>(
      f.matrix().cwiseMax(ft.matrix()).cwiseMin(1.0), 1.0);  // exceeds both somewhere
  const auto q_big = q_all_fast(s_big);
  try {
    bound_linear_form(f, ft, q_big);
    FAIL("expected DominationViolated");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DominationViolated);
  }

  // supplied S must be the one recorded in Q
  try {
    bound_log_form(f, ft, s_big, q);
    FAIL("expected InvalidArgument");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidArgument);
  }

  // reducible envelope is refused
  DenseMatrix<double> diag(2, 2);
  diag << 0.5, 0.0, 0.0, 0.5;
  const auto s_red = validate_substochastic(diag, 1e-12);
  try {
    make_bound_report(f, ft, std::optional(s_red));
    FAIL("expected Reducible");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Reducible);
  }
}

TEST_CASE("sharpness witness structure and failure modes") {
  std::mt19937_64 rng(161803);
  const auto s = mt::random_substochastic(rng, 6, 0.5, 0.9);
  const Index i = 2, j = 4;
  const auto [f, feta] = sharpness_witness(s, i, j, 1e-4);

  // differs only at (i,j) and (i,i)
  DenseMatrix<double> diff = feta.matrix() - f.matrix();
  CHECK(diff(i, j) == doctest::Approx(1e-4).epsilon(1e-10));
  CHECK(diff(i, i) == doctest::Approx(-1e-4).epsilon(1e-10));
  diff(i, j) = diff(i, i) = 0.0;
  CHECK(diff.cwiseAbs().maxCoeff() == 0.0);

  // both dominate S
  CHECK(((f.matrix() - s.matrix()).array() >= -1e-15).all());
  CHECK(((feta.matrix() - s.matrix()).array() >= -1e-15).all());

  // stochastic S has no slack anywhere
  const auto stoch = SubstochasticMatrix<double>::from_stochastic(fixture_f());
  try {
    sharpness_witness(stoch, 0, 1, 1e-4);
    FAIL("expected NoSlack");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoSlack);
  }

  try {
    sharpness_witness(s, 2, 4, 1.0);
    FAIL("expected EtaTooLarge");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::EtaTooLarge);
  }
}

TEST_CASE("sharpness witness achieves half the predicted sensitivity") {
  // existence over the eta sweep {1e-3, 1e-4, 1e-5} at epsilon = 1e-3; the
  // middle value is also asserted directly (it is the acceptance setting)
  std::mt19937_64 rng(271828);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + Index(rng() % 11);
    const auto s = mt::random_substochastic(rng, n, 0.4, 0.95);
    const Index i = Index(rng() % std::uint64_t(n));
    Index j = Index(rng() % std::uint64_t(n));
    if (j == i) j = (j + 1) % n;
    const double q = q_single(s, i, j);

    bool exists = false;
    for (const double eta : {1e-3, 1e-4, 1e-5}) {
      const auto [f, feta] = sharpness_witness(s, i, j, eta);
      const double achieved = true_relative_error(f, feta);
      const bool ok = achieved >= 0.5 / (q + 1e-3) * eta;
      exists = exists || ok;
      if (eta == 1e-4) CHECK(ok);
    }
    CHECK(exists);
  }
}

TEST_CASE("Ipsen-Meyer condition numbers") {
  const auto kappa = ipsen_meyer_kappas(fixture_f());
  CHECK(kappa[0] == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
  CHECK(kappa[1] == doctest::Approx(5.0).epsilon(1e-12));

  std::mt19937_64 rng(55);
  const auto g = mt::random_stochastic(rng, 9);
  const auto k = ipsen_meyer_kappas(g);
  for (Index i = 0; i < 9; ++i) {
    const auto stats = passage_stats(g, i);
    double worst = 0;
    for (Index j = 0; j < 9; ++j)
      if (j != i) worst = std::max(worst, stats.expected_hit[j]);
    CHECK(k[i] == doctest::Approx(worst).epsilon(1e-10));
  }
}

TEST_CASE("O'Cinneide multiplicative bound") {
  const auto b = ocinneide_bound(fixture_f(), fixture_ft());
  REQUIRE(b.has_value());
  CHECK(*b == doctest::Approx(2.0 * std::log(1.1)).epsilon(1e-12));
  CHECK(*b >= true_relative_error(fixture_f(), fixture_ft()));

  CHECK(*ocinneide_bound(fixture_f(), fixture_f()) == 0.0);

  // sparsity change makes the bound inapplicable
  DenseMatrix<double> m(3, 3);
  m << 0.5, 0.5, 0.0, 0.25, 0.5, 0.25, 0.25, 0.25, 0.5;
  DenseMatrix<double> mt2 = m;
  mt2(0, 2) = 0.25;
  mt2(0, 1) = 0.25;
  const auto fa = validate_stochastic(m, 1e-12);
  const auto fb = validate_stochastic(mt2, 1e-12);
  CHECK_FALSE(ocinneide_bound(fa, fb).has_value());

  // domination on random same-sparsity pairs
  std::mt19937_64 rng(66);
  for (int trial = 0; trial < 20; ++trial) {
    const Index n = 2 + Index(rng() % 7);
    const auto f = mt::random_stochastic(rng, n);
    const auto ft = mt::random_stochastic(rng, n);
    const auto bound = ocinneide_bound(f, ft);
    REQUIRE(bound.has_value());
    CHECK(*bound >= true_relative_error(f, ft) - 1e-12);
  }
}

TEST_CASE("mean first passage matrix and the Cho-Meyer coefficients") {
  const auto f = fixture_f();
  const auto mfpt = mfpt_matrix(f);
  CHECK(mfpt(1, 0) == doctest::Approx(10.0 / 3.0).epsilon(1e-12));
  CHECK(mfpt(0, 1) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(mfpt(0, 0) == doctest::Approx(5.0 / 3.0).epsilon(1e-12));  // 1/pi_1

  const auto coeffs = cho_meyer_beta(f);
  CHECK(coeffs.beta(0, 1) == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(std::isnan(coeffs.beta(0, 0)));
  CHECK(cho_meyer_bound_value(coeffs, f, fixture_ft()) ==
        doctest::Approx(0.1).epsilon(1e-12));
}

TEST_CASE("Cho-Meyer exact expansion reproduced") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 12; ++trial) {
    const Index n = 2 + Index(rng() % 9);  // L <= 10
    const auto f = mt::random_stochastic(rng, n);
    const auto ft = mt::random_stochastic(rng, n);
    const auto mfpt = mfpt_matrix(f);
    const auto pf = stationary_distribution(f).pi;
    const auto pt = stationary_distribution(ft).pi;
    for (Index m = 0; m < n; ++m) {
      const double lhs = (pt[m] - pf[m]) / pf[m];
      const double rhs = cho_meyer_expansion_rhs(f, ft, mfpt, pt, m);
      CHECK(std::abs(lhs - rhs) <= 1e-8 * std::max(1.0, std::abs(lhs)));
    }
  }
}

TEST_CASE("beta dominates the half-inverse-hitting lower bound") {
  std::mt19937_64 rng(88);
  for (int trial = 0; trial < 6; ++trial) {
    const Index n = 2 + Index(rng() % 7);
    const auto f = mt::random_stochastic(rng, n);
    const auto coeffs = cho_meyer_beta(f);
    const auto pi = stationary_distribution(f).pi;
    for (Index i = 0; i < n; ++i) {
      const auto stats = passage_stats(f, i);
      for (Index j = 0; j < n; ++j) {
        if (i == j) continue;
        const double floor = 0.5 / (pi[i] * stats.hit_before_return[j]);
        CHECK(coeffs.beta(i, j) >= floor * (1.0 - 1e-10));
      }
    }
  }
}

TEST_CASE("full report on the analytic pair") {
  const auto report = make_bound_report(fixture_f(), fixture_ft());
  CHECK(report.true_error == doctest::Approx(kTwoStateMaxError).epsilon(1e-10));
  CHECK(report.log_form == doctest::Approx(std::log(1.1)).epsilon(1e-10));
  CHECK(report.linear_form == doctest::Approx(0.1).epsilon(1e-10));
  CHECK(report.ipsen_meyer[0] == doctest::Approx(10.0 / 3.0).epsilon(1e-10));
  CHECK(report.cho_meyer_bound == doctest::Approx(0.1).epsilon(1e-10));
  REQUIRE(report.ocinneide.has_value());
  CHECK(report.q_source == QSource::Fast);
}
