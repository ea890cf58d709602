#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "mcsense/errors.hpp"

namespace mcsense {

using Eigen::Index;

template <typename Scalar>
using DenseMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using DenseVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// Relative pivot threshold below which an LU factorization is declared
/// singular: min |u_kk| <= kPivotRelTol * max|A|.
inline constexpr double kPivotRelTol = 1e-13;

namespace detail {

template <typename Scalar>
void require_square_finite(const DenseMatrix<Scalar>& m, const char* what) {
  if (m.rows() == 0 || m.rows() != m.cols())
    fail(ErrorCode::InvalidArgument,
         std::string(what) + ": matrix must be square with dimension >= 1");
  if (!m.allFinite())
    fail(ErrorCode::InvalidArgument,
         std::string(what) + ": matrix has non-finite entries");
}

// Tarjan's strongly connected components, iterative so deep chains do not
// overflow the stack. Edges are the nonzero off-diagonal entries.
template <typename Scalar>
std::vector<std::vector<Index>> tarjan_scc(const DenseMatrix<Scalar>& m) {
  const Index n = m.rows();
  std::vector<Index> index(n, -1), lowlink(n, 0);
  std::vector<bool> on_stack(n, false);
  std::vector<Index> stack;
  std::vector<std::vector<Index>> components;
  Index counter = 0;

  struct Frame {
    Index v;
    Index next_child;
  };
  std::vector<Frame> call;

  for (Index root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    call.push_back({root, 0});
    while (!call.empty()) {
      Frame& f = call.back();
      const Index v = f.v;
      if (f.next_child == 0) {
        index[v] = lowlink[v] = counter++;
        stack.push_back(v);
        on_stack[v] = true;
      }
      bool descended = false;
      while (f.next_child < n) {
        const Index w = f.next_child++;
        if (w == v || !(m(v, w) > Scalar(0))) continue;
        if (index[w] == -1) {
          call.push_back({w, 0});
          descended = true;
          break;
        }
        if (on_stack[w]) lowlink[v] = std::min(lowlink[v], index[w]);
      }
      if (descended) continue;
      if (lowlink[v] == index[v]) {
        components.emplace_back();
        Index w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = false;
          components.back().push_back(w);
        } while (w != v);
        std::sort(components.back().begin(), components.back().end());
      }
      call.pop_back();
      if (!call.empty()) {
        Frame& parent = call.back();
        lowlink[parent.v] = std::min(lowlink[parent.v], lowlink[v]);
      }
    }
  }
  std::sort(components.begin(), components.end());
  return components;
}

// Human-readable component list with 1-based state labels.
inline std::string describe_components(
    const std::vector<std::vector<Index>>& comps) {
  std::ostringstream os;
  os << "strongly connected components (states, 1-based): ";
  for (std::size_t c = 0; c < comps.size(); ++c) {
    os << (c ? " " : "") << "{";
    for (std::size_t k = 0; k < comps[c].size(); ++k)
      os << (k ? "," : "") << comps[c][k] + 1;
    os << "}";
  }
  return os.str();
}

template <typename Scalar>
void check_lu_pivots(const Eigen::PartialPivLU<DenseMatrix<Scalar>>& lu,
                     Scalar scale) {
  const Scalar threshold = Scalar(kPivotRelTol) * std::max(scale, Scalar(1e-300));
  const auto diag = lu.matrixLU().diagonal();
  for (Index k = 0; k < diag.size(); ++k) {
    using std::abs;
    if (abs(diag[k]) <= threshold)
      fail(ErrorCode::SingularMatrix,
           "pivot " + std::to_string(k) + " below threshold " +
               std::to_string(double(threshold)) + "; matrix is numerically singular");
  }
}

}  // namespace detail

/// Strongly connected components of the digraph with an edge (i,j) whenever
/// M_ij > 0 and i != j. Components are sorted; a single component means the
/// chain is irreducible.
template <typename Scalar>
std::vector<std::vector<Index>> strongly_connected_components(
    const DenseMatrix<Scalar>& m) {
  detail::require_square_finite(m, "strongly_connected_components");
  return detail::tarjan_scc(m);
}

/// True iff the digraph on the strict off-diagonal support of M is strongly
/// connected. The decision is structural: entry > 0, no epsilon.
template <typename Scalar>
bool is_irreducible(const DenseMatrix<Scalar>& m) {
  detail::require_square_finite(m, "is_irreducible");
  if (m.minCoeff() < Scalar(0))
    fail(ErrorCode::InvalidArgument, "is_irreducible: entries must be >= 0");
  return detail::tarjan_scc(m).size() == 1;
}

/// Row-stochastic transition matrix with validated invariants: entries >= 0,
/// rows renormalized to sum exactly 1, and an irreducibility certificate.
/// Immutable after construction; safe to share across threads.
template <typename Scalar>
class StochasticMatrix {
 public:
  const DenseMatrix<Scalar>& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }
  Scalar tolerance() const { return tol_; }

 private:
  StochasticMatrix(DenseMatrix<Scalar> m, Scalar tol)
      : m_(std::move(m)), tol_(tol) {}
  DenseMatrix<Scalar> m_;
  Scalar tol_;

  template <typename S>
  friend StochasticMatrix<S> validate_stochastic(const DenseMatrix<S>&, S);
};

/// Nonnegative matrix with row sums <= 1 and a recorded irreducibility flag.
/// Some operations (the sensitivity computations) require the flag to be set.
template <typename Scalar>
class SubstochasticMatrix {
 public:
  const DenseMatrix<Scalar>& matrix() const { return m_; }
  Index dim() const { return m_.rows(); }
  bool irreducible() const { return irreducible_; }

  /// A stochastic matrix is substochastic; the certificate carries over.
  static SubstochasticMatrix from_stochastic(const StochasticMatrix<Scalar>& f) {
    return SubstochasticMatrix(f.matrix(), true);
  }

 private:
  SubstochasticMatrix(DenseMatrix<Scalar> m, bool irr)
      : m_(std::move(m)), irreducible_(irr) {}
  DenseMatrix<Scalar> m_;
  bool irreducible_;

  template <typename S>
  friend SubstochasticMatrix<S> validate_substochastic(const DenseMatrix<S>&, S);
};

/// Validates and certifies a stochastic matrix. Rows whose sums are within
/// `tol` of 1 are divided by their sums so downstream identities hold to
/// machine precision.
template <typename Scalar>
StochasticMatrix<Scalar> validate_stochastic(const DenseMatrix<Scalar>& m,
                                             Scalar tol) {
  detail::require_square_finite(m, "validate_stochastic");
  const Index n = m.rows();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (m(i, j) < Scalar(0))
        fail(ErrorCode::NegativeEntry,
             "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                 ") = " + std::to_string(double(m(i, j))) + " is negative (states 1-based)");
  DenseMatrix<Scalar> out = m;
  for (Index i = 0; i < n; ++i) {
    using std::abs;
    const Scalar sum = m.row(i).sum();
    if (abs(sum - Scalar(1)) > tol)
      fail(ErrorCode::RowSumOutOfTolerance,
           "row " + std::to_string(i + 1) + " sums to " +
               std::to_string(double(sum)) + ", outside tolerance " +
               std::to_string(double(tol)) + " of 1 (states 1-based)");
    out.row(i) /= sum;
  }
  const auto comps = detail::tarjan_scc(out);
  if (comps.size() != 1)
    fail(ErrorCode::Reducible,
         "matrix is reducible; " + detail::describe_components(comps));
  return StochasticMatrix<Scalar>(std::move(out), tol);
}

/// Validates a substochastic matrix: entries >= 0, row sums <= 1 + tol (rows
/// marginally above 1 are renormalized down to exactly 1). Irreducibility is
/// recorded as a flag, not an error.
template <typename Scalar>
SubstochasticMatrix<Scalar> validate_substochastic(const DenseMatrix<Scalar>& m,
                                                   Scalar tol) {
  detail::require_square_finite(m, "validate_substochastic");
  const Index n = m.rows();
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j)
      if (m(i, j) < Scalar(0))
        fail(ErrorCode::NegativeEntry,
             "entry (" + std::to_string(i + 1) + "," + std::to_string(j + 1) +
                 ") = " + std::to_string(double(m(i, j))) + " is negative (states 1-based)");
  DenseMatrix<Scalar> out = m;
  for (Index i = 0; i < n; ++i) {
    const Scalar sum = m.row(i).sum();
    if (sum > Scalar(1) + tol)
      fail(ErrorCode::RowSumExceedsOne,
           "row " + std::to_string(i + 1) + " sums to " +
               std::to_string(double(sum)) + " > 1 (states 1-based)");
    if (sum > Scalar(1)) out.row(i) /= sum;
  }
  const bool irr = detail::tarjan_scc(out).size() == 1;
  return SubstochasticMatrix<Scalar>(std::move(out), irr);
}

/// S with row j and column j deleted, acting on the complementary coordinates.
template <typename Scalar>
struct PrincipalSubmatrixView {
  const DenseMatrix<Scalar>* parent;
  Index removed;

  Index dim() const { return parent->rows() - 1; }

  Index to_parent(Index reduced) const {
    return reduced < removed ? reduced : reduced + 1;
  }
  Index from_parent(Index full) const {
    return full < removed ? full : full - 1;
  }

  DenseMatrix<Scalar> dense() const {
    const Index n = parent->rows();
    DenseMatrix<Scalar> out(n - 1, n - 1);
    for (Index r = 0; r < n - 1; ++r) {
      const Index pr = to_parent(r);
      for (Index c = 0; c < n - 1; ++c) out(r, c) = (*parent)(pr, to_parent(c));
    }
    return out;
  }
};

/// Materializes the principal submatrix of M with row/column j removed.
template <typename Scalar>
DenseMatrix<Scalar> principal_submatrix(const DenseMatrix<Scalar>& m, Index j) {
  if (j < 0 || j >= m.rows())
    fail(ErrorCode::InvalidArgument, "principal_submatrix: index out of range");
  return PrincipalSubmatrixView<Scalar>{&m, j}.dense();
}

template <typename Scalar>
struct LinearSolve {
  DenseVector<Scalar> x;
  Scalar residual;  // ||Ax - b||_inf
};

template <typename Scalar>
struct Inverse {
  DenseMatrix<Scalar> inv;
  Scalar residual;  // ||A inv - I||_inf
};

/// Solves Ax = b by LU with partial pivoting; throws SingularMatrix if a
/// pivot falls below kPivotRelTol * max|A|.
template <typename Scalar>
LinearSolve<Scalar> solve_linear(const DenseMatrix<Scalar>& a,
                                 const DenseVector<Scalar>& b) {
  detail::require_square_finite(a, "solve_linear");
  if (b.size() != a.rows())
    fail(ErrorCode::InvalidArgument, "solve_linear: dimension mismatch");
  Eigen::PartialPivLU<DenseMatrix<Scalar>> lu(a);
  detail::check_lu_pivots(lu, a.cwiseAbs().maxCoeff());
  DenseVector<Scalar> x = lu.solve(b);
  const Scalar residual = (a * x - b).cwiseAbs().maxCoeff();
  return {std::move(x), residual};
}

template <typename Scalar>
Inverse<Scalar> invert(const DenseMatrix<Scalar>& a) {
  detail::require_square_finite(a, "invert");
  Eigen::PartialPivLU<DenseMatrix<Scalar>> lu(a);
  detail::check_lu_pivots(lu, a.cwiseAbs().maxCoeff());
  DenseMatrix<Scalar> inv = lu.inverse();
  const Scalar residual =
      (a * inv - DenseMatrix<Scalar>::Identity(a.rows(), a.cols()))
          .cwiseAbs()
          .maxCoeff();
  return {std::move(inv), residual};
}

using DenseMatrixXd = DenseMatrix<double>;
using DenseVectorXd = DenseVector<double>;
using StochasticMatrixXd = StochasticMatrix<double>;
using SubstochasticMatrixXd = SubstochasticMatrix<double>;

}  // namespace mcsense
