#pragma once

#include <complex>

#include <Eigen/Dense>

namespace qwalk {

using Complex = std::complex<double>;

inline constexpr double kUnitarityTolerance = 1e-12;

/// Angles of the one-qubit coin family. Values are stored as given; use
/// canonical() to reduce theta into [0, pi/2] and the phases into [0, 2 pi).
struct CoinParams {
  double theta = 0.0;
  double beta = 0.0;
  double gamma = 0.0;

  CoinParams canonical() const;
};

/// Largest elementwise deviation of M^dagger M from the identity.
double unitarity_defect(const Eigen::MatrixXcd& m);

/// Dense 2x2 unitary acting on one subcoin.
class CoinMatrix2 {
 public:
  /// Identity coin.
  CoinMatrix2();

  /// Throws InvalidOperator unless m is unitary within kUnitarityTolerance.
  static CoinMatrix2 from_matrix(const Eigen::Matrix2cd& m);

  const Eigen::Matrix2cd& matrix() const { return m_; }
  Complex operator()(int row, int col) const { return m_(row, col); }

 private:
  explicit CoinMatrix2(const Eigen::Matrix2cd& m) : m_(m) {}
  Eigen::Matrix2cd m_;
};

/// Dense 4x4 unitary on the composite coin. Basis order is fixed across the
/// library: |up,up>, |up,down>, |down,up>, |down,down>, i.e. index 2*s1 + s2
/// with up = 0 and down = 1.
class CoinMatrix4 {
 public:
  CoinMatrix4();

  static CoinMatrix4 from_matrix(const Eigen::Matrix4cd& m);

  const Eigen::Matrix4cd& matrix() const { return m_; }
  Complex operator()(int row, int col) const { return m_(row, col); }

 private:
  explicit CoinMatrix4(const Eigen::Matrix4cd& m) : m_(m) {}
  Eigen::Matrix4cd m_;
};

/// [[cos t, sin t e^{i b}], [sin t e^{i g}, -cos t e^{i(g+b)}]].
/// Throws InvalidParameter for non-finite angles.
CoinMatrix2 build_c2(const CoinParams& params);

CoinMatrix2 hadamard();
/// build_c2(theta, pi/2, pi/2) = [[cos, i sin], [i sin, cos]].
CoinMatrix2 kempe(double theta);

/// CNOT with the first subcoin as control: swaps |down,up> and |down,down>.
CoinMatrix4 cnot();

/// a (x) b in the global basis order.
CoinMatrix4 separable_coin(const CoinMatrix2& a, const CoinMatrix2& b);

/// (a (x) b) * CNOT. The CNOT acts first on a state.
CoinMatrix4 entangling_coin(const CoinMatrix2& a, const CoinMatrix2& b);

}  // namespace qwalk
