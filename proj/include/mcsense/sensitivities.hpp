#pragma once

#include <cmath>
#include <limits>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "mcsense/detail/hitting_solve.hpp"
#include "mcsense/matrix_core.hpp"
#include "mcsense/parallel.hpp"

namespace mcsense {

/// Round-off band inside which hitting probabilities are clamped back into
/// [0,1]; values further out are treated as numerical breakdown.
inline constexpr double kProbabilityClampTol = 1e-12;

enum class QSource { Oracle, Fast };

/// Hitting probabilities q_k = P_k[hit j before returning to i or absorbing]
/// for the absorbing-augmented chain of a substochastic S. Entry j is unset
/// (NaN). `clamped` counts entries nudged back into [0,1] from round-off.
template <typename Scalar>
struct HittingVector {
  Index i, j;
  DenseVector<Scalar> q;
  long clamped = 0;
};

/// All sensitivities Q_ij for i != j; the diagonal is unset (NaN). Carries
/// the matrix S it was computed from, so bound evaluations can re-verify
/// domination, plus fallback/clamp diagnostics from the fast algorithm.
template <typename Scalar>
struct SensitivityMatrix {
  DenseMatrix<Scalar> q;
  QSource source;
  SubstochasticMatrix<Scalar> base;
  std::vector<Index> fallback_columns;
  long clamp_count = 0;

  Scalar value(Index i, Index j) const {
    if (i == j) fail(ErrorCode::SameIndex, "Q_ii is undefined");
    return q(i, j);
  }
};

/// Reference-column workspace of the fast algorithm: the inverse of
/// A(1) = I - S + e_1 e_1^T S and the product S A(1)^{-1}, from which every
/// other column follows by a rank-two update.
template <typename Scalar>
struct AlgorithmWorkspace {
  DenseMatrix<Scalar> ainv1;
  DenseMatrix<Scalar> s_ainv1;

  /// 2x2 capacitance matrix of the rank-two update taking column 1 to column j.
  Eigen::Matrix<Scalar, 2, 2> capacitance(Index j) const {
    Eigen::Matrix<Scalar, 2, 2> c;
    c << Scalar(1) + s_ainv1(j, j), -s_ainv1(j, 0),
         s_ainv1(0, j), Scalar(1) - s_ainv1(0, 0);
    return c;
  }
};

namespace detail {

template <typename Scalar>
void require_pair(const SubstochasticMatrix<Scalar>& s, Index i, Index j) {
  if (!s.irreducible())
    fail(ErrorCode::Reducible,
         "sensitivities require an irreducible matrix; when the lower envelope "
         "is reducible no error statement can be made");
  if (i == j) fail(ErrorCode::SameIndex, "indices i and j must differ");
  if (i < 0 || j < 0 || i >= s.dim() || j >= s.dim())
    fail(ErrorCode::InvalidArgument, "state index out of range");
}

template <typename Scalar>
Scalar certify_probability(Scalar v, long& clamped, const char* what) {
  if (v < Scalar(0)) {
    if (v < Scalar(-kProbabilityClampTol))
      fail(ErrorCode::SingularMatrix,
           std::string(what) + " = " + std::to_string(double(v)) +
               " below -1e-12; numerical breakdown");
    ++clamped;
    return Scalar(0);
  }
  if (v > Scalar(1)) {
    if (v > Scalar(1) + Scalar(kProbabilityClampTol))
      fail(ErrorCode::SingularMatrix,
           std::string(what) + " = " + std::to_string(double(v)) +
               " above 1+1e-12; numerical breakdown");
    ++clamped;
    return Scalar(1);
  }
  return v;
}

// A(j) = I - S with row j replaced by e_j^T; its inverse restricted to the
// coordinates away from j is (I - S_j)^{-1}, and its j-th column holds the
// hitting probabilities of column j.
template <typename Scalar>
DenseMatrix<Scalar> column_pinned_system(const DenseMatrix<Scalar>& s, Index j) {
  const Index n = s.rows();
  DenseMatrix<Scalar> a = DenseMatrix<Scalar>::Identity(n, n) - s;
  a.row(j).setZero();
  a(j, j) = Scalar(1);
  return a;
}

}  // namespace detail

/// Per-pair oracle: solves the hitting system for (i, j) directly on the
/// (L-1)-dimensional space excluding j. Entries are certified to lie in
/// [0,1] up to round-off.
template <typename Scalar>
HittingVector<Scalar> q_vector(const SubstochasticMatrix<Scalar>& s, Index i,
                               Index j) {
  detail::require_pair(s, i, j);
  HittingVector<Scalar> out{i, j, detail::hitting_probabilities(s.matrix(), i, j), 0};
  for (Index k = 0; k < out.q.size(); ++k) {
    if (k == j) continue;
    out.q[k] = detail::certify_probability(out.q[k], out.clamped, "q entry");
  }
  return out;
}

/// Q_ij(S): probability of hitting j before returning to i or absorbing,
/// started from i. This is the per-pair oracle the fast algorithm is checked
/// against.
template <typename Scalar>
Scalar q_single(const SubstochasticMatrix<Scalar>& s, Index i, Index j) {
  return q_vector(s, i, j).q[i];
}

/// Builds the reference-column workspace (one L x L inversion; the product
/// S A(1)^{-1} follows in O(L^2) because S = I - A(1) + e_1 e_1^T S).
template <typename Scalar>
AlgorithmWorkspace<Scalar> build_workspace(const SubstochasticMatrix<Scalar>& s) {
  if (!s.irreducible())
    fail(ErrorCode::Reducible, "fast sensitivity algorithm requires irreducible S");
  const DenseMatrix<Scalar>& m = s.matrix();
  const Index n = s.dim();
  AlgorithmWorkspace<Scalar> w;
  w.ainv1 = invert(detail::column_pinned_system(m, Index(0))).inv;
  w.s_ainv1 = w.ainv1 - DenseMatrix<Scalar>::Identity(n, n);
  w.s_ainv1.row(0) = m.row(0) * w.ainv1;
  return w;
}

/// All Q_ij(S) from one matrix inversion plus O(L^2) work per column: column
/// 1 is read off A(1)^{-1} directly, every other column j comes from the
/// Sherman-Morrison-Woodbury rank-two update moving the pinned row from 1 to
/// j. Columns whose 2x2 capacitance is numerically singular fall back to a
/// direct solve and are recorded in fallback_columns.
template <typename Scalar>
SensitivityMatrix<Scalar> q_all_fast(const SubstochasticMatrix<Scalar>& s,
                                     int threads = 1) {
  const Index n = s.dim();
  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  SensitivityMatrix<Scalar> out{DenseMatrix<Scalar>::Constant(n, n, nan),
                                QSource::Fast, s, {}, 0};
  if (n == 1) return out;

  const AlgorithmWorkspace<Scalar> w = build_workspace(s);
  const DenseMatrix<Scalar>& b = w.ainv1;
  const DenseMatrix<Scalar>& t = w.s_ainv1;

  std::mutex diag_mutex;
  std::vector<long> clamps(std::size_t(n), 0);

  // Column 1 (reference): Q_i1 = A(1)^{-1}_i1 / A(1)^{-1}_ii.
  for (Index i = 1; i < n; ++i) {
    out.q(i, 0) = detail::certify_probability(b(i, 0) / b(i, i), clamps[0], "Q entry");
  }

  parallel_for(1, long(n), threads, [&](long jl) {
    const Index j = Index(jl);
    const Eigen::Matrix<Scalar, 2, 2> c = w.capacitance(j);
    const Scalar det = c(0, 0) * c(1, 1) - c(0, 1) * c(1, 0);
    const Scalar scale = c.cwiseAbs().maxCoeff();
    using std::abs;
    if (!(abs(det) > Scalar(1e-12) * std::max(Scalar(1), scale * scale))) {
      // Ill-conditioned capacitance: solve this column directly.
      const DenseMatrix<Scalar> ajinv =
          invert(detail::column_pinned_system(s.matrix(), j)).inv;
      for (Index i = 0; i < n; ++i) {
        if (i == j) continue;
        out.q(i, j) = detail::certify_probability(ajinv(i, j) / ajinv(i, i),
                                                  clamps[std::size_t(j)], "Q entry");
      }
      std::lock_guard<std::mutex> lock(diag_mutex);
      out.fallback_columns.push_back(j);
      return;
    }
    const Eigen::Matrix<Scalar, 2, 2> cinv =
        (Eigen::Matrix<Scalar, 2, 2>() << c(1, 1) / det, -c(0, 1) / det,
         -c(1, 0) / det, c(0, 0) / det)
            .finished();

    // A(j)^{-1} e_j = (1 - w0) B e_j + w1 B e_1 with (w0, w1) = C^{-1} (T_jj, T_1j).
    const Scalar w0 = cinv(0, 0) * t(j, j) + cinv(0, 1) * t(0, j);
    const Scalar w1 = cinv(1, 0) * t(j, j) + cinv(1, 1) * t(0, j);
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      const Scalar numer = (Scalar(1) - w0) * b(i, j) + w1 * b(i, 0);
      // A(j)^{-1}_ii = B_ii - (B_ij, -B_i1) C^{-1} (T_ji, T_1i)^T.
      const Scalar g0 = cinv(0, 0) * t(j, i) + cinv(0, 1) * t(0, i);
      const Scalar g1 = cinv(1, 0) * t(j, i) + cinv(1, 1) * t(0, i);
      const Scalar denom = b(i, i) - (b(i, j) * g0 - b(i, 0) * g1);
      out.q(i, j) = detail::certify_probability(numer / denom,
                                                clamps[std::size_t(j)], "Q entry");
    }
  });

  for (long c : clamps) out.clamp_count += c;
  std::sort(out.fallback_columns.begin(), out.fallback_columns.end());
  return out;
}

/// All Q_ij(S) by the per-pair oracle. O(L^5); intended for cross-checks and
/// small matrices.
template <typename Scalar>
SensitivityMatrix<Scalar> q_all_oracle(const SubstochasticMatrix<Scalar>& s) {
  const Index n = s.dim();
  const Scalar nan = std::numeric_limits<Scalar>::quiet_NaN();
  SensitivityMatrix<Scalar> out{DenseMatrix<Scalar>::Constant(n, n, nan),
                                QSource::Oracle, s, {}, 0};
  for (Index j = 0; j < n; ++j)
    for (Index i = 0; i < n; ++i) {
      if (i == j) continue;
      auto hv = q_vector(s, i, j);
      out.q(i, j) = hv.q[i];
      out.clamp_count += hv.clamped;
    }
  return out;
}

/// True iff Q(S_big) dominates Q(S_small) entrywise within `slack`. Requires
/// S_small <= S_big entrywise and S_small irreducible.
template <typename Scalar>
bool monotonicity_check(const SubstochasticMatrix<Scalar>& s_small,
                        const SubstochasticMatrix<Scalar>& s_big,
                        Scalar slack = Scalar(1e-12)) {
  if (s_small.dim() != s_big.dim())
    fail(ErrorCode::InvalidArgument, "monotonicity_check: dimension mismatch");
  if (((s_big.matrix() - s_small.matrix()).array() < Scalar(0)).any())
    fail(ErrorCode::NotDominated, "S_small must be <= S_big entrywise");
  const auto q_small = q_all_fast(s_small);
  const auto q_big = q_all_fast(s_big);
  for (Index i = 0; i < s_small.dim(); ++i)
    for (Index j = 0; j < s_small.dim(); ++j) {
      if (i == j) continue;
      if (q_big.q(i, j) < q_small.q(i, j) - slack) return false;
    }
  return true;
}

}  // namespace mcsense
