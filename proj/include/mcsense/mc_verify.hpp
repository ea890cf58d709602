#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "mcsense/matrix_core.hpp"
#include "mcsense/parallel.hpp"

namespace mcsense {

/// Hard cap on trajectory length; exceeding it raises CapExceeded rather
/// than silently truncating (the usual cause is a misused reducible input).
inline constexpr std::uint64_t kTrajectoryCap = 100'000'000;

/// SplitMix64: 64-bit seedable generator with cheap splitting. One substream
/// per trajectory, derived from (seed, trajectory index), makes parallel and
/// serial runs agree bit for bit.
struct SplitMix64 {
  std::uint64_t state;

  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ULL;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next() {
    state += kGamma;
    return mix(state);
  }

  /// Uniform draw in [0, 1).
  double uniform() { return double(next() >> 11) * 0x1.0p-53; }
};

inline SplitMix64 substream(std::uint64_t seed, std::uint64_t index) {
  return SplitMix64{SplitMix64::mix(seed + SplitMix64::kGamma * (index + 1))};
}

/// Index standing for the absorbing state of the augmented chain.
inline constexpr Index kOmega = -1;

/// Sampling view of S^omega: per-row cumulative sums over the original
/// states; any missing row mass flows to the absorbing state.
template <typename Scalar>
struct AugmentedChain {
  DenseMatrix<Scalar> cumulative;
  DenseVector<Scalar> absorb_prob;

  static AugmentedChain from(const SubstochasticMatrix<Scalar>& s) {
    return build(s.matrix(), /*force_stochastic=*/false);
  }

  /// Stochastic chains get absorb probability exactly zero so no trajectory
  /// can be lost to round-off in the row sums.
  static AugmentedChain from(const StochasticMatrix<Scalar>& f) {
    return build(f.matrix(), /*force_stochastic=*/true);
  }

  /// One transition from `from` given a uniform draw; ties in the cumulative
  /// sums are resolved by strict inequality on the draw.
  Index step(Index from, Scalar u) const {
    const Index n = cumulative.rows();
    for (Index l = 0; l < n; ++l)
      if (u < cumulative(from, l)) return l;
    return kOmega;
  }

 private:
  static AugmentedChain build(const DenseMatrix<Scalar>& m, bool force_stochastic) {
    const Index n = m.rows();
    AugmentedChain chain;
    chain.cumulative.resize(n, n);
    chain.absorb_prob.resize(n);
    for (Index i = 0; i < n; ++i) {
      Scalar acc(0);
      for (Index j = 0; j < n; ++j) {
        acc += m(i, j);
        chain.cumulative(i, j) = acc;
      }
      if (force_stochastic) {
        chain.cumulative(i, n - 1) = Scalar(1);
        chain.absorb_prob[i] = Scalar(0);
      } else {
        chain.absorb_prob[i] = std::max(Scalar(0), Scalar(1) - acc);
      }
    }
    return chain;
  }
};

/// Monte Carlo estimate with its standard error, sample count, and seed.
struct McEstimate {
  double point;
  double stderr_;
  std::int64_t n;
  std::uint64_t seed;
};

namespace detail {

[[noreturn]] inline void cap_exceeded() {
  fail(ErrorCode::CapExceeded,
       "trajectory exceeded " + std::to_string(kTrajectoryCap) +
           " steps; the chain may be reducible or nearly absorbing");
}

template <typename Scalar>
void check_mc_args(Index dim, Index i, Index j, std::int64_t n) {
  if (n < 1) fail(ErrorCode::ZeroSamples, "sample count must be >= 1");
  if (i == j) fail(ErrorCode::SameIndex, "indices i and j must differ");
  if (i < 0 || j < 0 || i >= dim || j >= dim)
    fail(ErrorCode::InvalidArgument, "state index out of range");
}

using u128 = unsigned __int128;

// Sums integer per-trajectory outcomes over `threads` workers, each owning a
// contiguous block. Integer accumulation is order-free, so the totals are
// identical for any thread count.
template <typename PerTrajectory>
std::pair<std::int64_t, double> accumulate_counts(std::int64_t n, int threads,
                                                  PerTrajectory&& value) {
  const int workers = int(std::max<std::int64_t>(
      1, std::min<std::int64_t>(resolve_threads(threads), n)));
  const std::int64_t chunk = (n + workers - 1) / workers;
  std::vector<std::int64_t> sums(std::size_t(workers), 0);
  std::vector<u128> sqsums(std::size_t(workers), 0);
  parallel_for(0, workers, workers, [&](long w) {
    const std::int64_t lo = w * chunk;
    const std::int64_t hi = std::min(n, lo + chunk);
    std::int64_t local = 0;
    u128 local_sq = 0;
    for (std::int64_t t = lo; t < hi; ++t) {
      const std::int64_t v = value(std::uint64_t(t));
      local += v;
      local_sq += u128(std::uint64_t(v)) * std::uint64_t(v);
    }
    sums[std::size_t(w)] = local;
    sqsums[std::size_t(w)] = local_sq;
  });
  std::int64_t total = 0;
  u128 total_sq = 0;
  for (std::size_t s = 0; s < sums.size(); ++s) {
    total += sums[s];
    total_sq += sqsums[s];
  }
  const double mean = double(total) / double(n);
  double var = 0.0;
  if (n > 1) {
    const double ex2 = double(total_sq) / double(n);
    var = std::max(0.0, (ex2 - mean * mean) * double(n) / double(n - 1));
  }
  return {total, std::sqrt(var / double(n))};
}

}  // namespace detail

/// Estimates Q_ij(S) = P_i[hit j before returning to i or absorbing] by
/// simulating n trajectories of the augmented chain. Reproducible: the t-th
/// trajectory uses substream (seed, t) regardless of thread count.
template <typename Scalar>
McEstimate estimate_q(const SubstochasticMatrix<Scalar>& s, Index i, Index j,
                      std::int64_t n, std::uint64_t seed, int threads = 1) {
  detail::check_mc_args<Scalar>(s.dim(), i, j, n);
  const auto chain = AugmentedChain<Scalar>::from(s);
  auto one = [&](std::uint64_t t) -> std::int64_t {
    SplitMix64 rng = substream(seed, t);
    Index x = i;
    for (std::uint64_t step = 0; step < kTrajectoryCap; ++step) {
      x = chain.step(x, Scalar(rng.uniform()));
      if (x == j) return 1;
      if (x == i || x == kOmega) return 0;
    }
    detail::cap_exceeded();
  };
  auto [successes, _] = detail::accumulate_counts(n, threads, one);
  const double p = double(successes) / double(n);
  return {p, std::sqrt(p * (1.0 - p) / double(n)), n, seed};
}

/// Estimates E_j[number of visits to m strictly before reaching i] for a
/// stochastic chain, started at j.
template <typename Scalar>
McEstimate estimate_occupation(const StochasticMatrix<Scalar>& f, Index start_j,
                               Index target_i, Index count_m, std::int64_t n,
                               std::uint64_t seed, int threads = 1) {
  detail::check_mc_args<Scalar>(f.dim(), target_i, start_j, n);
  if (count_m < 0 || count_m >= f.dim())
    fail(ErrorCode::InvalidArgument, "state index out of range");
  const auto chain = AugmentedChain<Scalar>::from(f);
  auto one = [&](std::uint64_t t) -> std::int64_t {
    SplitMix64 rng = substream(seed, t);
    Index x = start_j;
    std::int64_t visits = (x == count_m) ? 1 : 0;
    for (std::uint64_t step = 0; step < kTrajectoryCap; ++step) {
      x = chain.step(x, Scalar(rng.uniform()));
      if (x == target_i) return visits;
      if (x == count_m) ++visits;
    }
    detail::cap_exceeded();
  };
  auto [total, se] = detail::accumulate_counts(n, threads, one);
  return {double(total) / double(n), se, n, seed};
}

/// Both sides of the occupation-time decomposition
/// P_i[tau_j < tau_i] E_j[tau_i] = E_i[tau_i - tau_j, tau_j < tau_i].
/// The left side multiplies two independent estimates (standard error by the
/// delta method); the right side is estimated directly. The caller asserts
/// that the confidence intervals overlap.
template <typename Scalar>
std::pair<McEstimate, McEstimate> check_decomposition(
    const StochasticMatrix<Scalar>& f, Index i, Index j, std::int64_t n,
    std::uint64_t seed, int threads = 1) {
  detail::check_mc_args<Scalar>(f.dim(), i, j, n);
  const auto chain = AugmentedChain<Scalar>::from(f);

  const std::uint64_t seed_p = SplitMix64::mix(seed ^ 0x70726F6261626C65ULL);
  const std::uint64_t seed_e = SplitMix64::mix(seed ^ 0x6578706563746564ULL);
  const std::uint64_t seed_r = SplitMix64::mix(seed ^ 0x72657475726E7331ULL);

  // P_i[tau_j < tau_i]
  auto hit_one = [&](std::uint64_t t) -> std::int64_t {
    SplitMix64 rng = substream(seed_p, t);
    Index x = i;
    for (std::uint64_t step = 0; step < kTrajectoryCap; ++step) {
      x = chain.step(x, Scalar(rng.uniform()));
      if (x == j) return 1;
      if (x == i) return 0;
    }
    detail::cap_exceeded();
  };
  auto [hits, _unused] = detail::accumulate_counts(n, threads, hit_one);
  const double p = double(hits) / double(n);
  const double p_se = std::sqrt(p * (1.0 - p) / double(n));

  // E_j[tau_i]
  auto time_one = [&](std::uint64_t t) -> std::int64_t {
    SplitMix64 rng = substream(seed_e, t);
    Index x = j;
    for (std::uint64_t step = 1; step <= kTrajectoryCap; ++step) {
      x = chain.step(x, Scalar(rng.uniform()));
      if (x == i) return std::int64_t(step);
    }
    detail::cap_exceeded();
  };
  auto [tsum, t_se] = detail::accumulate_counts(n, threads, time_one);
  const double e = double(tsum) / double(n);

  McEstimate lhs{p * e, std::sqrt(e * e * p_se * p_se + p * p * t_se * t_se), n,
                 seed};

  // E_i[tau_i - tau_j, tau_j < tau_i], sampled directly from excursions at i.
  auto excursion_one = [&](std::uint64_t t) -> std::int64_t {
    SplitMix64 rng = substream(seed_r, t);
    Index x = i;
    std::int64_t tau_j = -1;
    for (std::uint64_t step = 1; step <= kTrajectoryCap; ++step) {
      x = chain.step(x, Scalar(rng.uniform()));
      if (x == j && tau_j < 0) tau_j = std::int64_t(step);
      if (x == i) return tau_j < 0 ? 0 : std::int64_t(step) - tau_j;
    }
    detail::cap_exceeded();
  };
  auto [dsum, d_se] = detail::accumulate_counts(n, threads, excursion_one);
  McEstimate rhs{double(dsum) / double(n), d_se, n, seed};
  return {lhs, rhs};
}

}  // namespace mcsense
