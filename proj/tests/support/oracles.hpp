#pragma once

// Independent oracles used to pin expected values: brute-force reachability,
// closed forms for the two-state chain, and finite differences of the
// stationary distribution. These deliberately avoid the library's own
// computational paths.

#include <cmath>

#include "mcsense/matrix_core.hpp"
#include "mcsense/stationary.hpp"

namespace mcsense::testing {

/// Reachability-based irreducibility: positivity of sum_{k<L} (I+M)^k.
inline bool brute_force_irreducible(const DenseMatrix<double>& m) {
  const Index n = m.rows();
  DenseMatrix<double> reach = DenseMatrix<double>::Identity(n, n);
  DenseMatrix<double> step = DenseMatrix<double>::Identity(n, n);
  DenseMatrix<double> adj = DenseMatrix<double>::Identity(n, n);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (i != j && m(i, j) > 0) adj(i, j) = 1;
  for (Index k = 1; k < n; ++k) {
    step = step * adj;
    // keep entries bounded: only the zero pattern matters
    step = (step.array() > 0).cast<double>();
    reach += step;
  }
  return (reach.array() > 0).all();
}

/// Closed forms for the chain [[1-a, a], [b, 1-b]].
struct TwoStateFacts {
  double a, b;
  double pi1() const { return b / (a + b); }
  double pi2() const { return a / (a + b); }
  double hit_12() const { return a; }        // P_1[tau_2 < tau_1]
  double hit_21() const { return b; }        // P_2[tau_1 < tau_2]
  double expected_hit_21() const { return 1.0 / b; }  // E_2[tau_1]
  double expected_hit_12() const { return 1.0 / a; }  // E_1[tau_2]
};

/// Central finite difference of the stationary distribution along the
/// stochastic-preserving direction e_i e_j^T - e_i e_i^T.
inline DenseVector<double> fd_stationary_derivative(
    const StochasticMatrix<double>& f, Index i, Index j, double eps) {
  DenseMatrix<double> up = f.matrix();
  up(i, j) += eps;
  up(i, i) -= eps;
  DenseMatrix<double> down = f.matrix();
  down(i, j) -= eps;
  down(i, i) += eps;
  const auto pi_up = stationary_distribution(validate_stochastic(up, 1e-9)).pi;
  const auto pi_down =
      stationary_distribution(validate_stochastic(down, 1e-9)).pi;
  return (pi_up - pi_down) / (2.0 * eps);
}

}  // namespace mcsense::testing
