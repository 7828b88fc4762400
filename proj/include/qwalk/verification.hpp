#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/evolution.hpp"

namespace qwalk {

/// Dense amplitude array on the rectangle [-bound1, bound1] x [-bound2, bound2].
/// Shifts never wrap: a shift that would carry nonzero amplitude off the
/// rectangle raises LatticeTooSmall before anything is moved.
class DenseState {
 public:
  DenseState(std::int64_t bound1, std::int64_t bound2);

  std::int64_t bound1() const { return bound1_; }
  std::int64_t bound2() const { return bound2_; }
  std::int64_t time() const { return time_; }

  Complex& at(std::int64_t x1, std::int64_t x2, int s);
  Complex at(std::int64_t x1, std::int64_t x2, int s) const;

  double norm_squared() const;
  void apply_coin(const CoinMatrix4& c);
  void apply_shift(std::int64_t d1, std::int64_t d2);

 private:
  std::size_t index(std::int64_t x1, std::int64_t x2, int s) const;

  std::int64_t bound1_;
  std::int64_t bound2_;
  std::int64_t width1_;
  std::int64_t width2_;
  std::vector<Complex> amps_;
  std::int64_t time_ = 0;
};

/// Largest |dense - sparse| over every site and component of the rectangle,
/// plus any sparse entry outside it.
double max_abs_difference(const DenseState& dense, const SparseState& sparse);

/// States after 0..t_max steps, driven by draw_steps(config).
struct DenseTrajectory {
  std::vector<DenseState> states;
  StepSequence steps;
};

/// Square lattice of half-width L. 2-D only.
DenseTrajectory dense_evolve(const WalkConfig& config, std::int64_t bound);

struct OracleResult {
  bool passed = false;
  double max_deviation = 0.0;
};

inline constexpr double kSeparabilityTolerance = 1e-10;

/// Max over t of trace_distance(joint, product of marginals) for a separable
/// coin. Throws InvalidParameter for entangling configurations.
OracleResult separability_oracle(const WalkConfig& config);

/// Kraus operators of the effective channel on the first direction (position
/// x1 and subcoin 1), for an initial state (x1 part) x |x2 = 0> x b.
///
/// Input basis: x1 in [-input_bound, input_bound], index 2 (x1 + input_bound) + s1.
/// Output basis: the same layout on [-output_bound, output_bound] with
/// output_bound = input_bound + sum of d1, so nothing is truncated and the
/// operators are rectangular. labels[j] = (x2, s2) of operators[j].
struct KrausSet {
  std::int64_t input_bound = 0;
  std::int64_t output_bound = 0;
  std::vector<Eigen::MatrixXcd> operators;
  std::vector<std::pair<std::int64_t, int>> labels;
  /// max |sum E^dagger E - I| measured before small operators were dropped.
  double completeness_defect = 0.0;

  Eigen::Index input_dimension() const { return 2 * (2 * input_bound + 1); }
  Eigen::Index output_dimension() const { return 2 * (2 * output_bound + 1); }
};

inline constexpr double kKrausCompletenessTolerance = 1e-10;
inline constexpr double kKrausDropNorm = 1e-14;

/// Splits the configured initial coin as a (x) b (throws InvalidState if it is
/// not a product), evolves every input basis vector densely and reads off
/// E_(x2, s2) = <x2, s2| U |0, b>. Throws InvalidDensity if completeness fails.
KrausSet kraus_decompose(const WalkConfig& config, std::int64_t input_bound);

/// sum_j E_j rho E_j^dagger. Labels of the result give x1 per basis index.
DensityMatrix channel_apply(const KrausSet& kraus, const DensityMatrix& rho0);

/// Factorization a (x) b of a product coin state, with b normalized.
std::pair<Amplitude2, Amplitude2> split_product_coin(const Amplitude4& coin);

/// rho over x1 (x) c1 from a dense state, in the KrausSet output layout.
Eigen::MatrixXcd dense_reduced_x1c1(const DenseState& state);

struct CheckResult {
  std::string name;
  bool passed = false;
  double value = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool all_passed() const;
};

struct VerificationOptions {
  std::uint64_t seed = 1;
  std::size_t seeds_per_class = 20;
};

VerificationReport run_verification_suite(const VerificationOptions& options = {});

}  // namespace qwalk
