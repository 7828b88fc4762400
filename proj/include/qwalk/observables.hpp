#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "qwalk/walker_state.hpp"

namespace qwalk {

/// Measurements taken at one step. Fields are absent when the observable
/// was not requested at that step, never zero-filled.
struct ObservableRecord {
  std::int64_t t = 0;
  std::optional<double> var_x1;
  std::optional<double> var_x2;
  std::optional<double> var_r;
  std::optional<double> trace_distance;
  std::optional<double> entropy_c;
  std::optional<double> entropy_c1;
  std::optional<double> entropy_c2;
  std::optional<double> negativity;
  std::optional<double> coherence_x1;
};

inline constexpr double kHermiticityTolerance = 1e-12;
inline constexpr double kTraceTolerance = 1e-10;
inline constexpr double kEigenvalueFloor = -1e-10;
inline constexpr double kEntropyCutoff = 1e-12;

struct DensityDiagnostics {
  double hermiticity = 0.0;  ///< max |rho - rho^dagger|
  double trace_error = 0.0;  ///< |tr rho - 1|
  double min_eigenvalue = 0.0;

  bool valid() const;
};

/// Dense reduced density matrix. Labels name the basis states: coin indices
/// for coin reductions, sorted positions for position reductions, and
/// 2 * x1_index + s1 style composite indices where documented.
class DensityMatrix {
 public:
  DensityMatrix() = default;
  DensityMatrix(Eigen::MatrixXcd rho, std::vector<std::int64_t> labels);

  const Eigen::MatrixXcd& matrix() const { return rho_; }
  const std::vector<std::int64_t>& labels() const { return labels_; }
  Eigen::Index dimension() const { return rho_.rows(); }

  /// Ascending eigenvalues of the Hermitian part.
  Eigen::VectorXd eigenvalues() const;
  DensityDiagnostics diagnostics() const;
  /// Throws InvalidDensity with the failing diagnostic.
  void validate() const;

 private:
  Eigen::MatrixXcd rho_;
  std::vector<std::int64_t> labels_;
};

struct CoinReductions {
  DensityMatrix coin;      ///< 4x4, global coin basis
  DensityMatrix subcoin1;  ///< 2x2, second subcoin traced out
  DensityMatrix subcoin2;  ///< 2x2, first subcoin traced out
};

struct FitWindow {
  std::int64_t lo = 0;
  std::int64_t hi = 0;
};

struct FitResult {
  double exponent = 0.0;
  double intercept = 0.0;
  FitWindow window;
  double residual = 0.0;  ///< RMS of the log residuals
  std::size_t points = 0;
};

struct SeriesPoint {
  std::int64_t t = 0;
  double value = 0.0;
};

std::pair<LineDistribution, LineDistribution> marginals(const JointDistribution& joint);

double mean(const LineDistribution& dist);
/// Second central moment (two-pass).
double variance(const LineDistribution& dist);
/// m4 / m2^2 - 3; 0 for a point mass by convention.
double excess_kurtosis(const LineDistribution& dist);

/// Half the l1 distance over the union of supports.
double trace_distance(const JointDistribution& p, const JointDistribution& q);
/// trace_distance(joint, product of its marginals) without materializing the
/// product distribution.
double separability_distance(const JointDistribution& joint);

/// OLS of ln(value) on ln(t) over points with lo <= t <= hi, value > 0.
/// Throws FitError with fewer than three usable points or lo >= hi.
FitResult fit_power_law(std::span<const SeriesPoint> series, FitWindow window);
/// Slope of ln var against ln t.
FitResult fit_dynamical_exponent(std::span<const SeriesPoint> series, FitWindow window);
/// C ~ t^(-beta): exponent is -slope.
FitResult fit_coherence_decay(std::span<const SeriesPoint> series, FitWindow window);

CoinReductions reduced_coin_density(const SparseState& state);
/// Coin density matrix assembled from an accumulated sum of psi psi^dagger.
CoinReductions coin_reductions_from(const Eigen::Matrix4cd& rho_c);
/// 2x2 coin reduction of a line walker.
DensityMatrix reduced_coin_density(const LineState& state);

/// -sum lambda log2 lambda over eigenvalues above kEntropyCutoff.
double entanglement_entropy(const DensityMatrix& rho);
/// (||rho^{T_A}||_1 - 1) / 2 with the transpose over the first subcoin.
double negativity(const DensityMatrix& rho_c);

/// rho_x1[x, x'] = sum_{x2, s} psi(x, x2, s) conj(psi(x', x2, s)); labels are
/// the occupied x1 values, ascending.
DensityMatrix reduced_position_density_x1(const SparseState& state);
/// Same with the first subcoin kept: basis index 2 * i + s1, where i indexes
/// the ascending occupied x1 values; labels hold x1 per basis index.
DensityMatrix reduced_position_coin_density_x1(const SparseState& state);
/// Position density of a line walker with its coin traced out.
DensityMatrix reduced_position_density(const LineState& state);

/// (1/t) sum_{j > i} |rho_ij|. Throws InvalidParameter for t < 1.
double l1_coherence(const DensityMatrix& rho_x1, std::int64_t t);

}  // namespace qwalk
