#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/coin_ops.hpp"
#include "qwalk/walker_state.hpp"

namespace qwalk {

/// Position moments and coin density of a 2-D walk from a localized start,
/// estimated in momentum space.
///
/// A localized state has Fourier transform psi(k) = c, and a step maps
/// psi(k) to P(k) C psi(k) with P diagonal: component (s1, s2) picks up
/// exp(-i (k1 s1 d1 + k2 s2 d2)). With g_j = d psi / d k_j,
///   <x_j>   = avg over k of Re(psi^dagger (i g_j)),
///   <x_j^2> = avg over k of |g_j|^2,
///   rho_c   = avg over k of psi psi^dagger,
/// where the average over the Brillouin zone is replaced by a jittered
/// m x m grid. The estimator is exact in expectation; rho_c stays positive
/// with unit trace for any sample set.
struct SpectralMoments {
  std::int64_t samples = 0;
  /// Index t - 1 holds the value after step t.
  std::vector<double> mean_x1, mean_x2, second_x1, second_x2;
  std::vector<Eigen::Matrix4cd> coin_density;

  double variance_x1(std::int64_t t) const;
  double variance_x2(std::int64_t t) const;
};

/// `samples` is rounded up to the next perfect square. The jitter stream is
/// seeded with `jitter_seed`.
SpectralMoments spectral_moments(const CoinMatrix4& coin, const Amplitude4& initial,
                                 const std::vector<std::int64_t>& d1,
                                 const std::vector<std::int64_t>& d2, std::int64_t samples,
                                 std::uint64_t jitter_seed);

}  // namespace qwalk
