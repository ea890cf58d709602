#pragma once

#include <utility>

#include "mcsense/detail/hitting_solve.hpp"
#include "mcsense/stationary.hpp"

namespace mcsense {

/// One derivative slice: d pi_m / d F_ij along the stochastic-preserving
/// direction e_i e_j^T - e_i e_i^T, its logarithmic counterpart, and the
/// exact extrema of the log derivative (attained at m = i and m = j).
template <typename Scalar>
struct DerivativeSlice {
  Index i, j;
  DenseVector<Scalar> dpi;
  DenseVector<Scalar> dlogpi;
  Scalar min_val, max_val;
  Index argmin, argmax;
};

/// Derivative of the invariant distribution with respect to F_ij, evaluated
/// from a precomputed stationary distribution and occupation matrix for
/// target i (reusable across j for the same i).
template <typename Scalar>
DerivativeSlice<Scalar> derivative_slice(const StochasticMatrix<Scalar>& f,
                                         const InvariantDistribution<Scalar>& dist,
                                         const OccupationMatrix<Scalar>& occ,
                                         Index i, Index j) {
  if (i == j) fail(ErrorCode::SameIndex, "derivative requires i != j");
  if (occ.target != i)
    fail(ErrorCode::InvalidArgument, "occupation matrix target mismatch");
  const Index n = f.dim();
  if (j < 0 || j >= n || i < 0 || i >= n)
    fail(ErrorCode::InvalidArgument, "state index out of range");

  const DenseVector<Scalar>& pi = dist.pi;
  const Index jr = occ.from_parent(j);
  const Scalar hold = occ.n.row(jr).sum();  // E_j[tau_i]

  DerivativeSlice<Scalar> out;
  out.i = i;
  out.j = j;
  out.dpi.resize(n);
  for (Index m = 0; m < n; ++m) {
    const Scalar visits = (m == i) ? Scalar(0) : occ.n(jr, occ.from_parent(m));
    out.dpi[m] = pi[i] * (visits - pi[m] * hold);
  }
  out.dlogpi = out.dpi.cwiseQuotient(pi);

  const Scalar p = detail::hitting_probabilities(f.matrix(), i, j)[i];
  out.min_val = -pi[i] * hold;
  out.max_val = Scalar(1) / p - pi[i] * hold;
  out.argmin = i;
  out.argmax = j;
  return out;
}

template <typename Scalar>
DerivativeSlice<Scalar> derivative_slice(const StochasticMatrix<Scalar>& f,
                                         Index i, Index j) {
  if (i == j) fail(ErrorCode::SameIndex, "derivative requires i != j");
  const auto dist = stationary_distribution(f);
  const auto occ = occupation_matrix(f, i);
  return derivative_slice(f, dist, occ, i, j);
}

/// Sharp sandwich for max_m |d log pi_m / d F_ij|: the returned pair is
/// (1/2, 1) times 1 / P_i[tau_j < tau_i].
template <typename Scalar>
std::pair<Scalar, Scalar> logderiv_bounds(const StochasticMatrix<Scalar>& f,
                                          Index i, Index j) {
  if (i == j) fail(ErrorCode::SameIndex, "logderiv_bounds requires i != j");
  if (i < 0 || j < 0 || i >= f.dim() || j >= f.dim())
    fail(ErrorCode::InvalidArgument, "state index out of range");
  const Scalar p = detail::hitting_probabilities(f.matrix(), i, j)[i];
  return {Scalar(0.5) / p, Scalar(1) / p};
}

}  // namespace mcsense
