#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>

#include "mcsense/sensitivities.hpp"
#include "mcsense/stationary.hpp"

namespace mcsense {

/// Entrywise slack tolerated when verifying F >= S (absorbs renormalization
/// round-off); the bound formulas clamp the residual F_ij - S_ij at zero.
inline constexpr double kDominationSlack = 1e-12;

/// Everything the bound comparison produces for a pair (F, Ftilde): the true
/// relative error, this library's log-form and linear-form bounds, and the
/// three baselines. `ocinneide` is absent when the sparsity patterns differ.
template <typename Scalar>
struct BoundReport {
  Scalar true_error;
  Scalar log_form;
  Scalar linear_form;
  DenseVector<Scalar> ipsen_meyer;
  std::optional<Scalar> ocinneide;
  Scalar cho_meyer_bound;
  QSource q_source;
  SubstochasticMatrix<Scalar> envelope;
};

/// beta_ij = max_m |(1-delta_jm) E_j[tau_m] - (1-delta_im) E_i[tau_m]|,
/// the first-passage coefficients of the mean-FPT perturbation expansion.
/// Diagonal unset (NaN).
template <typename Scalar>
struct ChoMeyerCoefficients {
  DenseMatrix<Scalar> beta;
};

/// Largest substochastic matrix dominated by every F within the entrywise
/// error budget alpha: S_ij = max{Ftilde_ij - alpha_ij, 0}. A reducible
/// envelope is returned with its flag false; the bound evaluations refuse it.
template <typename Scalar>
SubstochasticMatrix<Scalar> lower_envelope(const StochasticMatrix<Scalar>& ftilde,
                                           const DenseMatrix<Scalar>& alpha) {
  if (alpha.rows() != ftilde.dim() || alpha.cols() != ftilde.dim())
    fail(ErrorCode::InvalidArgument, "lower_envelope: alpha dimension mismatch");
  if ((alpha.array() < Scalar(0)).any())
    fail(ErrorCode::InvalidArgument, "lower_envelope: alpha must be >= 0");
  DenseMatrix<Scalar> s =
      (ftilde.matrix() - alpha).cwiseMax(Scalar(0));
  return validate_substochastic(s, Scalar(0));
}

/// max_m |log pi_m(Ftilde) - log pi_m(F)|.
template <typename Scalar>
Scalar true_relative_error(const StochasticMatrix<Scalar>& f,
                           const StochasticMatrix<Scalar>& ftilde) {
  if (f.dim() != ftilde.dim())
    fail(ErrorCode::InvalidArgument, "true_relative_error: dimension mismatch");
  const auto pf = stationary_distribution(f).pi;
  const auto pt = stationary_distribution(ftilde).pi;
  return (pt.array().log() - pf.array().log()).abs().maxCoeff();
}

namespace detail {

template <typename Scalar>
void require_dominates(const DenseMatrix<Scalar>& g,
                       const SubstochasticMatrix<Scalar>& s, const char* name) {
  if (g.rows() != s.dim())
    fail(ErrorCode::InvalidArgument, "bound evaluation: dimension mismatch");
  if (!s.irreducible())
    fail(ErrorCode::Reducible,
         "lower envelope S is reducible; no error statement can be made");
  for (Index i = 0; i < g.rows(); ++i)
    for (Index j = 0; j < g.cols(); ++j)
      if (g(i, j) < s.matrix()(i, j) - Scalar(kDominationSlack))
        fail(ErrorCode::DominationViolated,
             std::string(name) + " entry (" + std::to_string(i + 1) + "," +
                 std::to_string(j + 1) + ") lies below S (states 1-based)");
}

template <typename Scalar>
void require_matches_base(const SubstochasticMatrix<Scalar>& s,
                          const SensitivityMatrix<Scalar>& q) {
  if (s.dim() != q.base.dim() || (s.matrix() - q.base.matrix()).cwiseAbs().maxCoeff() != Scalar(0))
    fail(ErrorCode::InvalidArgument,
         "sensitivity matrix was computed from a different S than supplied");
}

}  // namespace detail

/// Log-form global bound:
/// sum_{i != j} |log(Ftilde_ij - S_ij + Q_ij) - log(F_ij - S_ij + Q_ij)|.
/// Domination of both matrices over S is re-verified against the S recorded
/// in Q's metadata.
template <typename Scalar>
Scalar bound_log_form(const StochasticMatrix<Scalar>& f,
                      const StochasticMatrix<Scalar>& ftilde,
                      const SubstochasticMatrix<Scalar>& s,
                      const SensitivityMatrix<Scalar>& q) {
  detail::require_matches_base(s, q);
  detail::require_dominates(f.matrix(), q.base, "F");
  detail::require_dominates(ftilde.matrix(), q.base, "Ftilde");
  const Index n = s.dim();
  Scalar total(0);
  using std::abs;
  using std::log;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Scalar a =
          std::max(ftilde.matrix()(i, j) - s.matrix()(i, j), Scalar(0)) + q.q(i, j);
      const Scalar b =
          std::max(f.matrix()(i, j) - s.matrix()(i, j), Scalar(0)) + q.q(i, j);
      total += abs(log(a) - log(b));
    }
  return total;
}

/// Linear-form global bound: sum_{i != j} |Ftilde_ij - F_ij| / Q_ij(S).
template <typename Scalar>
Scalar bound_linear_form(const StochasticMatrix<Scalar>& f,
                         const StochasticMatrix<Scalar>& ftilde,
                         const SensitivityMatrix<Scalar>& q) {
  detail::require_dominates(f.matrix(), q.base, "F");
  detail::require_dominates(ftilde.matrix(), q.base, "Ftilde");
  const Index n = f.dim();
  Scalar total(0);
  using std::abs;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      total += abs(ftilde.matrix()(i, j) - f.matrix()(i, j)) / q.q(i, j);
    }
  return total;
}

/// The sharpness construction: F collects all row slack of S into column i,
/// and Feta moves eta of the diagonal mass F_ii onto F_ij. Both matrices are
/// stochastic, dominate S, and differ only in entries (i,j) and (i,i).
template <typename Scalar>
std::pair<StochasticMatrix<Scalar>, StochasticMatrix<Scalar>> sharpness_witness(
    const SubstochasticMatrix<Scalar>& s, Index i, Index j, Scalar eta) {
  if (!s.irreducible())
    fail(ErrorCode::Reducible, "sharpness witness requires irreducible S");
  if (i == j) fail(ErrorCode::SameIndex, "sharpness witness requires i != j");
  const Index n = s.dim();
  if (i < 0 || j < 0 || i >= n || j >= n)
    fail(ErrorCode::InvalidArgument, "state index out of range");
  const Scalar slack_i = Scalar(1) - s.matrix().row(i).sum();
  if (!(slack_i > Scalar(0)))
    fail(ErrorCode::NoSlack,
         "row " + std::to_string(i + 1) +
             " of S has no slack; every stochastic completion is identical "
             "there (states 1-based)");
  if (!(eta > Scalar(0)) || eta >= slack_i)
    fail(ErrorCode::EtaTooLarge,
         "eta must lie in (0, " + std::to_string(double(slack_i)) + ")");

  DenseMatrix<Scalar> f = s.matrix();
  for (Index k = 0; k < n; ++k) {
    const Scalar off = f.row(k).sum() - f(k, i);
    f(k, i) = Scalar(1) - off;
  }
  DenseMatrix<Scalar> feta = f;
  feta(i, j) += eta;
  feta(i, i) -= eta;
  return {validate_stochastic(f, Scalar(1e-12)),
          validate_stochastic(feta, Scalar(1e-12))};
}

/// Ipsen-Meyer condition numbers kappa_i = ||(I - F_i)^{-1}||_inf, one per
/// state; equivalently the largest expected hitting time max_j E_j[tau_i].
template <typename Scalar>
DenseVector<Scalar> ipsen_meyer_kappas(const StochasticMatrix<Scalar>& f) {
  const Index n = f.dim();
  DenseVector<Scalar> kappa(n);
  for (Index i = 0; i < n; ++i) {
    const auto occ = occupation_matrix(f, i);
    kappa[i] = (n == 1) ? Scalar(0)
                        : occ.n.cwiseAbs().rowwise().sum().maxCoeff();
  }
  return kappa;
}

/// Multiplicative relative-error bound on the log scale:
/// L * log(max ratio of matching off-diagonal entries). Absent when the
/// off-diagonal sparsity patterns differ.
template <typename Scalar>
std::optional<Scalar> ocinneide_bound(const StochasticMatrix<Scalar>& f,
                                      const StochasticMatrix<Scalar>& ftilde) {
  if (f.dim() != ftilde.dim())
    fail(ErrorCode::InvalidArgument, "ocinneide_bound: dimension mismatch");
  const Index n = f.dim();
  Scalar ratio(1);
  using std::log;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const bool za = f.matrix()(i, j) == Scalar(0);
      const bool zb = ftilde.matrix()(i, j) == Scalar(0);
      if (za != zb) return std::nullopt;
      if (za) continue;
      const Scalar r = ftilde.matrix()(i, j) / f.matrix()(i, j);
      ratio = std::max({ratio, r, Scalar(1) / r});
    }
  return Scalar(n) * log(ratio);
}

/// Mean first passage times E_j[tau_m] for all (j, m); the diagonal holds the
/// return times E_m[tau_m]. Row sums of the per-target occupation matrices.
template <typename Scalar>
DenseMatrix<Scalar> mfpt_matrix(const StochasticMatrix<Scalar>& f) {
  const Index n = f.dim();
  DenseMatrix<Scalar> mfpt(n, n);
  for (Index m = 0; m < n; ++m) {
    const auto stats = passage_stats(f, m);
    mfpt.col(m) = stats.expected_hit;
  }
  return mfpt;
}

template <typename Scalar>
ChoMeyerCoefficients<Scalar> cho_meyer_beta(const StochasticMatrix<Scalar>& f) {
  const Index n = f.dim();
  const DenseMatrix<Scalar> mfpt = mfpt_matrix(f);
  DenseMatrix<Scalar> beta =
      DenseMatrix<Scalar>::Constant(n, n, std::numeric_limits<Scalar>::quiet_NaN());
  using std::abs;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      Scalar best(0);
      for (Index m = 0; m < n; ++m) {
        const Scalar ej = (j == m) ? Scalar(0) : mfpt(j, m);
        const Scalar ei = (i == m) ? Scalar(0) : mfpt(i, m);
        best = std::max(best, abs(ej - ei));
      }
      beta(i, j) = best;
    }
  return {std::move(beta)};
}

/// Companion evaluation of the mean-FPT bound: sum_{i!=j} beta_ij |dF_ij|.
template <typename Scalar>
Scalar cho_meyer_bound_value(const ChoMeyerCoefficients<Scalar>& coeffs,
                             const StochasticMatrix<Scalar>& f,
                             const StochasticMatrix<Scalar>& ftilde) {
  const Index n = f.dim();
  Scalar total(0);
  using std::abs;
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      total += coeffs.beta(i, j) * abs(ftilde.matrix()(i, j) - f.matrix()(i, j));
    }
  return total;
}

/// Exact first-passage expansion of the relative change of pi_m:
/// (pi_m(Ftilde) - pi_m(F)) / pi_m(F)
///   = sum_{i != j} pi_i(Ftilde) ((1-delta_im) E_i[tau_m] - (1-delta_jm) E_j[tau_m])
///                  (Ftilde_ij - F_ij),
/// with the expectations taken under F. Returns the right-hand side.
template <typename Scalar>
Scalar cho_meyer_expansion_rhs(const StochasticMatrix<Scalar>& f,
                               const StochasticMatrix<Scalar>& ftilde,
                               const DenseMatrix<Scalar>& mfpt,
                               const DenseVector<Scalar>& pi_tilde, Index m) {
  const Index n = f.dim();
  Scalar total(0);
  for (Index i = 0; i < n; ++i)
    for (Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const Scalar ei = (i == m) ? Scalar(0) : mfpt(i, m);
      const Scalar ej = (j == m) ? Scalar(0) : mfpt(j, m);
      total += pi_tilde[i] * (ei - ej) *
               (ftilde.matrix()(i, j) - f.matrix()(i, j));
    }
  return total;
}

/// Full bound comparison. When no envelope is supplied, S defaults to the
/// entrywise minimum of F and Ftilde (the largest matrix dominated by both).
template <typename Scalar>
BoundReport<Scalar> make_bound_report(
    const StochasticMatrix<Scalar>& f, const StochasticMatrix<Scalar>& ftilde,
    std::optional<SubstochasticMatrix<Scalar>> envelope = std::nullopt,
    QSource source = QSource::Fast, int threads = 1) {
  if (f.dim() != ftilde.dim())
    fail(ErrorCode::InvalidArgument, "make_bound_report: dimension mismatch");
  SubstochasticMatrix<Scalar> s =
      envelope ? std::move(*envelope)
               : validate_substochastic<Scalar>(
                     f.matrix().cwiseMin(ftilde.matrix()), Scalar(0));
  if (!s.irreducible())
    fail(ErrorCode::Reducible,
         "lower envelope S is reducible; no error statement can be made");
  const SensitivityMatrix<Scalar> q =
      source == QSource::Fast ? q_all_fast(s, threads) : q_all_oracle(s);
  BoundReport<Scalar> report{
      true_relative_error(f, ftilde),
      bound_log_form(f, ftilde, s, q),
      bound_linear_form(f, ftilde, q),
      ipsen_meyer_kappas(f),
      ocinneide_bound(f, ftilde),
      cho_meyer_bound_value(cho_meyer_beta(f), f, ftilde),
      source,
      std::move(s)};
  return report;
}

}  // namespace mcsense
