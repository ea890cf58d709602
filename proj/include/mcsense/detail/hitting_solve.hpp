#pragma once

#include <limits>

#include "mcsense/matrix_core.hpp"

namespace mcsense::detail {

// Solves (I - S_j + S_j e_i e_i^T) q = S column j (entry j dropped) on the
// coordinates excluding j. On those coordinates the system matrix is
// I - S with row/column j deleted, except that column i is replaced by the
// identity column: moving to i ends the excursion, so q_i feeds back into no
// other equation. Returns q embedded in a full-length vector with q[j] = NaN.
template <typename Scalar>
DenseVector<Scalar> hitting_probabilities(const DenseMatrix<Scalar>& s, Index i,
                                          Index j) {
  const Index n = s.rows();
  DenseMatrix<Scalar> m(n - 1, n - 1);
  DenseVector<Scalar> rhs(n - 1);
  const auto reduced = [j](Index full) { return full < j ? full : full - 1; };
  for (Index r = 0; r < n; ++r) {
    if (r == j) continue;
    const Index rr = reduced(r);
    rhs[rr] = s(r, j);
    for (Index c = 0; c < n; ++c) {
      if (c == j) continue;
      const Index cc = reduced(c);
      if (c == i)
        m(rr, cc) = (r == i) ? Scalar(1) : Scalar(0);
      else
        m(rr, cc) = (r == c ? Scalar(1) : Scalar(0)) - s(r, c);
    }
  }
  Eigen::PartialPivLU<DenseMatrix<Scalar>> lu(m);
  check_lu_pivots<Scalar>(lu, m.cwiseAbs().maxCoeff());
  DenseVector<Scalar> q = lu.solve(rhs);
  DenseVector<Scalar> full(n);
  full[j] = std::numeric_limits<Scalar>::quiet_NaN();
  for (Index r = 0; r < n; ++r)
    if (r != j) full[r] = q[reduced(r)];
  return full;
}

}  // namespace mcsense::detail
