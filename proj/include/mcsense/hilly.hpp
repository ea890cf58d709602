#pragma once

#include <Eigen/Eigenvalues>
#include <cmath>
#include <functional>
#include <numbers>
#include <utility>
#include <vector>

#include "mcsense/matrix_core.hpp"
#include "mcsense/stationary.hpp"

namespace mcsense {

/// Parameters of the periodic energy-landscape chain: L grid points on the
/// unit circle, a potential V, and the scale alpha used when studies take
/// S = alpha * F. The default potential is V(x) = cos(4 pi x) / (4 pi),
/// a "W" with peaks at 0, 1/2, 1 and valleys at 1/4, 3/4.
template <typename Scalar>
struct HillyConfig {
  Index length;
  Scalar alpha = Scalar(1);
  std::function<Scalar(Scalar)> potential = default_potential;
  bool is_default_potential = true;

  static Scalar default_potential(Scalar x) {
    const Scalar four_pi = Scalar(4) * std::numbers::pi_v<Scalar>;
    using std::cos;
    return cos(four_pi * x) / four_pi;
  }

  static HillyConfig standard(Index length, Scalar alpha = Scalar(1)) {
    return HillyConfig{length, alpha, default_potential, true};
  }
};

template <typename Scalar>
struct HillyChain {
  StochasticMatrix<Scalar> transition;
  InvariantDistribution<Scalar> pi_exact;
};

/// Spectral diagnostics of a chain: spectral gap, smallest real part of the
/// spectrum, largest imaginary magnitude (reality check for reversible
/// chains), the eigenvalue attaining the second-largest modulus, and the
/// bottleneck ratio with its mixing-time lower bound 1/(4 Phi).
template <typename Scalar>
struct SpectralSummary {
  Scalar gap;
  Scalar eigen_min;
  Scalar max_imag;
  Scalar second_eigenvalue;
  Scalar min_gap_to_one;  // min |1 - lambda| over non-unit eigenvalues
  Scalar bottleneck;
  Scalar mixing_lb;
};

template <typename Scalar>
struct GapScalingRow {
  Index length;
  Scalar gamma;
  Scalar log_inv_gamma;
  Scalar bottleneck;
  Scalar eigen_min;
  Scalar cond_proxy;  // 1 / (L * min |1 - lambda|)
};

namespace detail {

template <typename Scalar>
void require_hilly_length(Index length) {
  if (length < 4 || length % 2 != 0)
    fail(ErrorCode::InvalidArgument,
         "hilly landscape requires an even number of states, L >= 4");
}

}  // namespace detail

/// Shortest walk length between i and j on the L-cycle.
inline Index ring_distance(Index i, Index j, Index length) {
  const Index d = std::abs(i - j);
  return std::min(d, length - d);
}

/// Nearest-neighbor Metropolis-style chain on Z/LZ in detailed balance with
/// the Gibbs vector pi(i) proportional to exp(-L V(i/L)). Row sums are exact:
/// the diagonal is defined as the complement of the two neighbor moves.
template <typename Scalar>
HillyChain<Scalar> hilly_matrix(const HillyConfig<Scalar>& cfg) {
  detail::require_hilly_length<Scalar>(cfg.length);
  if (!(cfg.alpha > Scalar(0)) || cfg.alpha > Scalar(1))
    fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
  const Index n = cfg.length;

  DenseVector<Scalar> energy(n);
  for (Index i = 0; i < n; ++i)
    energy[i] = Scalar(n) * cfg.potential(Scalar(i + 1) / Scalar(n));

  // Neighbor ratios pi(b)/(pi(a)+pi(b)) = 1/(1 + exp(E_b - E_a)) stay
  // well-scaled even when the raw Gibbs weights span many decades.
  DenseMatrix<Scalar> f = DenseMatrix<Scalar>::Zero(n, n);
  using std::exp;
  for (Index i = 0; i < n; ++i) {
    const Index up = (i + 1) % n;
    const Index down = (i + n - 1) % n;
    const Scalar to_up = Scalar(0.5) / (Scalar(1) + exp(energy[up] - energy[i]));
    const Scalar to_down =
        Scalar(0.5) / (Scalar(1) + exp(energy[down] - energy[i]));
    f(i, up) = to_up;
    f(i, down) = to_down;
    f(i, i) = Scalar(1) - to_up - to_down;
  }

  DenseVector<Scalar> gibbs =
      ((-energy).array() + energy.minCoeff()).exp().matrix();
  gibbs /= gibbs.sum();

  StochasticMatrix<Scalar> certified = validate_stochastic(f, Scalar(1e-14));
  const Scalar residual =
      (certified.matrix().transpose() * gibbs - gibbs).cwiseAbs().maxCoeff();
  return {std::move(certified), {std::move(gibbs), residual}};
}

/// Symmetric lazy ring walk: P_ii = P_{i,i+1} = P_{i,i-1} = 1/3.
template <typename Scalar>
StochasticMatrix<Scalar> ring_walk_matrix(Index length) {
  if (length < 3)
    fail(ErrorCode::InvalidArgument, "ring walk requires at least 3 states");
  DenseMatrix<Scalar> p = DenseMatrix<Scalar>::Zero(length, length);
  const Scalar third = Scalar(1) / Scalar(3);
  for (Index i = 0; i < length; ++i) {
    p(i, i) = third;
    p(i, (i + 1) % length) = third;
    p(i, (i + length - 1) % length) = third;
  }
  return validate_stochastic(p, Scalar(1e-14));
}

/// Uniform lower bound on the neighbor transition probabilities of the
/// default-potential chain: F_{i,i+/-1} >= 1/(2(1+e)), from Lip(V) = 1.
/// Consequently Q_{i,i+/-1}(alpha F)^{-1} <= 2(1+e)/alpha.
template <typename Scalar>
Scalar neighbor_entry_lower_bound(const HillyConfig<Scalar>& cfg) {
  if (!cfg.is_default_potential)
    fail(ErrorCode::NonDefaultPotential,
         "the neighbor bound is specific to the default potential (Lip V = 1)");
  using std::exp;
  return Scalar(0.5) / (Scalar(1) + exp(Scalar(1)));
}

/// Path lower bound on sensitivities via the comparison walk: the default
/// chain dominates (3/(2(1+e))) P, so Q_ij(alpha F) >= Q_ij(beta P) with
/// beta = 3 alpha / (2(1+e)), and a shortest cycle path of length d gives
/// Q_ij(beta P) >= (beta/3)^d = (alpha/(2(1+e)))^d.
template <typename Scalar>
Scalar random_walk_floor(Scalar alpha, Index i, Index j, Index length) {
  if (!(alpha > Scalar(0)) || alpha > Scalar(1))
    fail(ErrorCode::InvalidArgument, "alpha must lie in (0, 1]");
  if (i == j) fail(ErrorCode::SameIndex, "floor requires i != j");
  if (i < 0 || j < 0 || i >= length || j >= length)
    fail(ErrorCode::InvalidArgument, "state index out of range");
  using std::exp;
  using std::pow;
  const Scalar base = alpha / (Scalar(2) * (Scalar(1) + exp(Scalar(1))));
  return pow(base, Scalar(ring_distance(i, j, length)));
}

/// Grid index (0-based) of the potential maximum, and the two minima.
template <typename Scalar>
Index hilly_peak_index(const HillyConfig<Scalar>& cfg) {
  detail::require_hilly_length<Scalar>(cfg.length);
  Index best = 0;
  Scalar best_v = cfg.potential(Scalar(1) / Scalar(cfg.length));
  for (Index i = 1; i < cfg.length; ++i) {
    const Scalar v = cfg.potential(Scalar(i + 1) / Scalar(cfg.length));
    if (v > best_v) {
      best_v = v;
      best = i;
    }
  }
  return best;
}

template <typename Scalar>
std::pair<Index, Index> hilly_valley_indices(const HillyConfig<Scalar>& cfg) {
  detail::require_hilly_length<Scalar>(cfg.length);
  std::vector<std::pair<Scalar, Index>> graded;
  graded.reserve(std::size_t(cfg.length));
  for (Index i = 0; i < cfg.length; ++i)
    graded.emplace_back(cfg.potential(Scalar(i + 1) / Scalar(cfg.length)), i);
  std::sort(graded.begin(), graded.end());
  Index first = graded[0].second;
  // second valley: the lowest grid point not adjacent to the first
  for (const auto& [v, idx] : graded) {
    if (ring_distance(idx, first, cfg.length) > 1)
      return {std::min(first, idx), std::max(first, idx)};
  }
  fail(ErrorCode::InvalidArgument, "potential has no second valley");
}

/// Dense spectral diagnostics. `cut` is the state set E of the bottleneck
/// ratio Phi(E) = sum_{i in E, j notin E} pi_i F_ij / pi(E); it must be a
/// nonempty proper subset.
template <typename Scalar>
SpectralSummary<Scalar> spectral_summary(const StochasticMatrix<Scalar>& f,
                                         const InvariantDistribution<Scalar>& dist,
                                         const std::vector<Index>& cut) {
  const Index n = f.dim();
  if (cut.empty() || Index(cut.size()) >= n)
    fail(ErrorCode::InvalidArgument,
         "bottleneck cut must be a nonempty proper subset of the states");
  std::vector<bool> in_cut(std::size_t(n), false);
  for (Index s : cut) {
    if (s < 0 || s >= n)
      fail(ErrorCode::InvalidArgument, "cut state index out of range");
    in_cut[std::size_t(s)] = true;
  }

  Eigen::EigenSolver<DenseMatrix<Scalar>> solver(f.matrix(),
                                                 /*computeEigenvectors=*/false);
  if (solver.info() != Eigen::Success)
    fail(ErrorCode::EigenFailure, "dense eigenvalue computation failed");
  const auto eig = solver.eigenvalues();

  // The unit eigenvalue of an irreducible stochastic matrix is simple; drop
  // the eigenvalue closest to 1 and take the gap over the rest.
  Index unit = 0;
  Scalar best(std::abs(eig[0] - std::complex<Scalar>(1, 0)));
  for (Index k = 1; k < n; ++k) {
    const Scalar d = std::abs(eig[k] - std::complex<Scalar>(1, 0));
    if (d < best) {
      best = d;
      unit = k;
    }
  }
  Scalar top_modulus(0), second_eigenvalue(0), eigen_min(1), max_imag(0);
  Scalar min_gap_to_one = std::numeric_limits<Scalar>::infinity();
  for (Index k = 0; k < n; ++k) {
    using std::abs;
    max_imag = std::max(max_imag, abs(eig[k].imag()));
    eigen_min = std::min(eigen_min, eig[k].real());
    if (k == unit) continue;
    min_gap_to_one =
        std::min(min_gap_to_one, std::abs(eig[k] - std::complex<Scalar>(1, 0)));
    const Scalar mod = std::abs(eig[k]);
    if (mod > top_modulus) {
      top_modulus = mod;
      second_eigenvalue = eig[k].real();
    }
  }
  const Scalar gamma = Scalar(1) - top_modulus;

  Scalar flow(0), mass(0);
  for (Index i = 0; i < n; ++i) {
    if (!in_cut[std::size_t(i)]) continue;
    mass += dist.pi[i];
    for (Index j = 0; j < n; ++j)
      if (!in_cut[std::size_t(j)]) flow += dist.pi[i] * f.matrix()(i, j);
  }
  const Scalar phi = flow / mass;
  return {gamma,          eigen_min, max_imag, second_eigenvalue,
          min_gap_to_one, phi,       Scalar(1) / (Scalar(4) * phi)};
}

/// Gap-vs-size study over the default landscape: one row per L with the gap,
/// its logarithm, the bottleneck ratio of the half-circle cut E = {1..L/2},
/// the smallest eigenvalue, and the condition-number proxy
/// 1/(L min|1-lambda|). Trends only; the constants are not asserted.
template <typename Scalar>
std::vector<GapScalingRow<Scalar>> gap_scaling_study(
    const std::vector<Index>& lengths) {
  std::vector<GapScalingRow<Scalar>> rows;
  rows.reserve(lengths.size());
  for (Index length : lengths) {
    if (length < 8 || length % 2 != 0)
      fail(ErrorCode::InvalidArgument,
           "gap study requires even L >= 8, got " + std::to_string(length));
    const auto chain = hilly_matrix(HillyConfig<Scalar>::standard(length));
    std::vector<Index> cut;
    for (Index s = 0; s < length / 2; ++s) cut.push_back(s);
    const auto summary = spectral_summary(chain.transition, chain.pi_exact, cut);
    using std::log;
    rows.push_back({length, summary.gap, log(Scalar(1) / summary.gap),
                    summary.bottleneck, summary.eigen_min,
                    Scalar(1) / (Scalar(length) * summary.min_gap_to_one)});
  }
  return rows;
}

}  // namespace mcsense
