#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace qwalk {

/// The q parameter of the q-exponential step law. Either a finite value
/// q >= 0 or the distinguished value infinity (uniform steps).
class QParam {
 public:
  QParam() = default;

  /// Throws InvalidParameter for negative or NaN values. q = 0 is
  /// representable but has no admissible step; weights() rejects it.
  static QParam finite(double q);
  static QParam infinity();
  /// Accepts a decimal number or the token "inf".
  static QParam parse(std::string_view text);

  bool is_infinite() const { return infinite_; }
  /// Finite value; +inf for the infinite regime.
  double value() const;
  /// "inf" or the shortest round-trip decimal.
  std::string to_string() const;

  friend bool operator==(const QParam&, const QParam&) = default;

 private:
  double q_ = 0.5;
  bool infinite_ = false;
};

struct QExpParams {
  QParam q;
  std::int64_t t = 1;  ///< current step index; also the largest step size
};

struct StepWeights {
  /// probabilities[d - 1] is Pr(step = d) for d in 1..t.
  std::vector<double> probabilities;
  /// tau_t: the factor that turns the raw weights into probabilities.
  double normalization = 1.0;
};

/// q-exponential weights over {1, ..., t}, normalized over that set.
/// q = 1 and q = inf are evaluated in closed form; everything else in log
/// space. Throws DegenerateDistribution when no step has positive weight.
StepWeights weights(const QExpParams& params);

/// Throws DegenerateDistribution if q admits no step size at all.
void check_support(const QParam& q);

/// Deterministic uniform stream. Wraps mt19937_64; a uniform variate is the
/// top 53 bits of one engine output scaled to [0, 1), so streams are
/// reproducible across standard libraries.
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  double uniform();
  std::uint64_t draws() const { return draws_; }

 private:
  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

/// SplitMix64 finalizer.
std::uint64_t splitmix64(std::uint64_t x);

/// Sub-seed for stream `index` of a run seeded with `seed`:
/// splitmix64(seed ^ splitmix64(index)). Stable across versions.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

/// Inverse-CDF draw from weights(params). Consumes exactly one variate.
std::int64_t sample(const QExpParams& params, RandomStream& rng);

}  // namespace qwalk
