#pragma once

#include <cmath>
#include <string>
#include <utility>

#include "mcsense/detail/hitting_solve.hpp"
#include "mcsense/matrix_core.hpp"

namespace mcsense {

/// Strictly positive probability vector pi with pi^T F = pi^T, plus the
/// achieved residual ||pi^T F - pi^T||_inf.
template <typename Scalar>
struct InvariantDistribution {
  DenseVector<Scalar> pi;
  Scalar residual;
};

/// Expected occupation times before hitting a target state:
/// N(j, m) = E_j[number of visits to m strictly before reaching i], stored on
/// the reduced coordinates excluding the target. N = (I - F_i)^{-1}.
template <typename Scalar>
struct OccupationMatrix {
  Index target;
  DenseMatrix<Scalar> n;

  Index to_parent(Index reduced) const {
    return reduced < target ? reduced : reduced + 1;
  }
  Index from_parent(Index full) const {
    return full < target ? full : full - 1;
  }

  /// E_j[tau_target] for j != target: row sums of N.
  DenseVector<Scalar> expected_hit_reduced() const { return n.rowwise().sum(); }
};

/// First-passage summary for one target state i: expected hitting times
/// E_j[tau_i] (entry i holds the return time E_i[tau_i]) and the probabilities
/// P_i[tau_j < tau_i] of reaching j before returning to i (entry i is 0).
template <typename Scalar>
struct PassageStats {
  Index target;
  DenseVector<Scalar> expected_hit;
  DenseVector<Scalar> hit_before_return;
};

/// Solves pi^T (I - F) = 0 with the last (redundant) equation replaced by the
/// normalization sum pi = 1. Deterministic O(L^3); the residual is recorded.
template <typename Scalar>
InvariantDistribution<Scalar> stationary_distribution(
    const StochasticMatrix<Scalar>& f) {
  const Index n = f.dim();
  DenseMatrix<Scalar> a =
      DenseMatrix<Scalar>::Identity(n, n) - f.matrix().transpose();
  a.row(n - 1).setOnes();
  DenseVector<Scalar> b = DenseVector<Scalar>::Zero(n);
  b[n - 1] = Scalar(1);
  DenseVector<Scalar> pi = solve_linear(a, b).x;
  if (!(pi.minCoeff() > Scalar(0)))
    fail(ErrorCode::SingularMatrix,
         "stationary solve produced a non-positive entry; numerical breakdown");
  pi /= pi.sum();
  const Scalar residual =
      (f.matrix().transpose() * pi - pi).cwiseAbs().maxCoeff();
  return {std::move(pi), residual};
}

/// Cross-check oracle: pi_i proportional to det(I - F_i) over the principal
/// submatrices. O(L^4); retained as an independent route, not a fast path.
template <typename Scalar>
InvariantDistribution<Scalar> stationary_via_minors(
    const StochasticMatrix<Scalar>& f) {
  const Index n = f.dim();
  DenseVector<Scalar> dets(n);
  if (n == 1) {
    dets[0] = Scalar(1);  // empty determinant
  } else {
    for (Index i = 0; i < n; ++i) {
      DenseMatrix<Scalar> m =
          DenseMatrix<Scalar>::Identity(n - 1, n - 1) -
          principal_submatrix(f.matrix(), i);
      Eigen::PartialPivLU<DenseMatrix<Scalar>> lu(m);
      detail::check_lu_pivots<Scalar>(lu, m.cwiseAbs().maxCoeff());
      dets[i] = lu.determinant();
    }
  }
  const Scalar total = dets.sum();
  if (!(total > Scalar(0)))
    fail(ErrorCode::SingularMatrix,
         "principal minors are not positive; numerical breakdown");
  DenseVector<Scalar> pi = dets / total;
  const Scalar residual =
      (f.matrix().transpose() * pi - pi).cwiseAbs().maxCoeff();
  return {std::move(pi), residual};
}

/// Occupation matrix (I - F_i)^{-1} for target i, on the reduced coordinates.
template <typename Scalar>
OccupationMatrix<Scalar> occupation_matrix(const StochasticMatrix<Scalar>& f,
                                           Index i) {
  const Index n = f.dim();
  if (i < 0 || i >= n)
    fail(ErrorCode::InvalidArgument, "occupation_matrix: index out of range");
  if (n == 1) return {i, DenseMatrix<Scalar>(0, 0)};
  DenseMatrix<Scalar> m = DenseMatrix<Scalar>::Identity(n - 1, n - 1) -
                          principal_submatrix(f.matrix(), i);
  return {i, invert(m).inv};
}

/// First-passage statistics for target i. E_j[tau_i] comes from occupation
/// row sums; E_i[tau_i] from first-step analysis (1 + sum_j F_ij E_j[tau_i]),
/// which keeps the identity pi_i E_i[tau_i] = 1 testable without dividing by
/// pi_i. The probabilities P_i[tau_j < tau_i] come from the hitting solve
/// with S = F, under which the absorbing state is unreachable.
template <typename Scalar>
PassageStats<Scalar> passage_stats(const StochasticMatrix<Scalar>& f, Index i) {
  const Index n = f.dim();
  const OccupationMatrix<Scalar> occ = occupation_matrix(f, i);
  DenseVector<Scalar> expected_hit(n);
  Scalar return_time = Scalar(1);
  if (n > 1) {
    const DenseVector<Scalar> reduced = occ.expected_hit_reduced();
    for (Index r = 0; r < n - 1; ++r) {
      const Index full = occ.to_parent(r);
      expected_hit[full] = reduced[r];
      return_time += f.matrix()(i, full) * reduced[r];
    }
  }
  expected_hit[i] = return_time;

  DenseVector<Scalar> hit = DenseVector<Scalar>::Zero(n);
  for (Index j = 0; j < n; ++j) {
    if (j == i) continue;
    hit[j] = detail::hitting_probabilities(f.matrix(), i, j)[i];
  }
  return {i, std::move(expected_hit), std::move(hit)};
}

}  // namespace mcsense
