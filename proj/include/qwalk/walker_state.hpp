#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "qwalk/coin_ops.hpp"

namespace qwalk {

struct Site {
  std::int64_t x1 = 0;
  std::int64_t x2 = 0;

  friend auto operator<=>(const Site&, const Site&) = default;
};

using Amplitude4 = std::array<Complex, 4>;
using Amplitude2 = std::array<Complex, 2>;

/// Entries whose components are all below this modulus are dropped after a
/// shift. No renormalization follows.
inline constexpr double kPruneThreshold = 1e-16;
inline constexpr double kInitialNormTolerance = 1e-12;

/// Shift direction of each coin component: +1 for up, -1 for down.
inline constexpr std::array<int, 4> kSign1 = {+1, +1, -1, -1};
inline constexpr std::array<int, 4> kSign2 = {+1, -1, +1, -1};

/// Sorted lattice probability table: sites ascending, p[i] belongs to sites[i].
struct JointDistribution {
  std::vector<Site> sites;
  std::vector<double> p;

  /// 0 for sites not present.
  double probability(const Site& s) const;
  std::size_t size() const { return sites.size(); }
};

/// Probabilities on a line, x ascending.
struct LineDistribution {
  std::vector<std::int64_t> x;
  std::vector<double> p;

  double probability(std::int64_t at) const;
  std::size_t size() const { return x.size(); }
};

/// Two-dimensional walker wavefunction. Occupied sites are kept sorted by
/// (x1, x2) next to their 4-component coin amplitude, which makes iteration
/// order, and therefore every reduction over the state, deterministic.
class SparseState {
 public:
  SparseState() = default;

  /// Single occupied site. Throws InvalidState if |coin| differs from 1 by
  /// more than kInitialNormTolerance.
  static SparseState init_localized(const Site& origin, const Amplitude4& coin);

  /// Builds a state from arbitrary entries (duplicates are summed). Used by
  /// tests and the dense reference; no normalization check.
  static SparseState from_entries(std::vector<std::pair<Site, Amplitude4>> entries,
                                  std::int64_t time = 0);

  std::size_t size() const { return sites_.size(); }
  std::int64_t time() const { return time_; }
  std::span<const Site> sites() const { return sites_; }
  std::span<const Amplitude4> amplitudes() const { return amps_; }

  /// Zero vector when the site is not stored.
  Amplitude4 amplitude(const Site& s) const;
  double norm_squared() const;

  /// psi(site) <- c psi(site) at every site.
  void apply_coin(const CoinMatrix4& c);

  /// Component 2*s1 + s2 moves by (sign1 * d1, sign2 * d2); time advances by one.
  /// Requires d1, d2 >= 1.
  void apply_shift(std::int64_t d1, std::int64_t d2);

  JointDistribution joint_distribution() const;

 private:
  std::vector<Site> sites_;
  std::vector<Amplitude4> amps_;
  std::int64_t time_ = 0;
};

/// One-dimensional walker with a two-level coin.
class LineState {
 public:
  LineState() = default;

  static LineState init_localized(std::int64_t origin, const Amplitude2& coin);

  std::size_t size() const { return x_.size(); }
  std::int64_t time() const { return time_; }
  std::span<const std::int64_t> positions() const { return x_; }
  std::span<const Amplitude2> amplitudes() const { return amps_; }

  Amplitude2 amplitude(std::int64_t x) const;
  double norm_squared() const;

  void apply_coin(const CoinMatrix2& c);
  /// Up component moves by +d, down by -d.
  void apply_shift(std::int64_t d);

  LineDistribution distribution() const;

 private:
  std::vector<std::int64_t> x_;
  std::vector<Amplitude2> amps_;
  std::int64_t time_ = 0;
};

/// Snapshot text format, one record per occupied site:
///   # qwalk-snapshot v1
///   # t=<time> sites=<count>
///   x1,x2,re0,im0,re1,im1,re2,im2,re3,im3
///   <int>,<int>,<17 significant digits> x 8
/// Components follow the global coin basis order.
void write_snapshot(std::ostream& out, const SparseState& state);

}  // namespace qwalk
