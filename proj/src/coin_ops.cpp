#include "qwalk/coin_ops.hpp"

#include <cmath>
#include <limits>
#include <numbers>

#include <fmt/format.h>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

double wrap(double value, double period) {
  double r = std::fmod(value, period);
  if (r < 0.0) r += period;
  return r;
}

}  // namespace

CoinParams CoinParams::canonical() const {
  using std::numbers::pi;
  // C2(theta + pi) = -C2(theta) and C2(pi - theta, beta + pi, gamma + pi) =
  // -C2(theta, beta, gamma): the canonical angles give the same coin up to a
  // global sign.
  double t = wrap(theta, pi);
  double b = beta;
  double g = gamma;
  if (t > pi / 2) {
    t = pi - t;
    b += pi;
    g += pi;
  }
  return {t, wrap(b, 2 * pi), wrap(g, 2 * pi)};
}

double unitarity_defect(const Eigen::MatrixXcd& m) {
  if (m.rows() != m.cols()) return std::numeric_limits<double>::infinity();
  const Eigen::MatrixXcd d = m.adjoint() * m - Eigen::MatrixXcd::Identity(m.rows(), m.cols());
  return d.cwiseAbs().maxCoeff();
}

CoinMatrix2::CoinMatrix2() : m_(Eigen::Matrix2cd::Identity()) {}

CoinMatrix2 CoinMatrix2::from_matrix(const Eigen::Matrix2cd& m) {
  const double defect = unitarity_defect(m);
  if (!(defect < kUnitarityTolerance)) {
    throw InvalidOperator(fmt::format("2x2 coin is not unitary (defect {:.3e})", defect));
  }
  return CoinMatrix2(m);
}

CoinMatrix4::CoinMatrix4() : m_(Eigen::Matrix4cd::Identity()) {}

CoinMatrix4 CoinMatrix4::from_matrix(const Eigen::Matrix4cd& m) {
  const double defect = unitarity_defect(m);
  if (!(defect < kUnitarityTolerance)) {
    throw InvalidOperator(fmt::format("4x4 coin is not unitary (defect {:.3e})", defect));
  }
  return CoinMatrix4(m);
}

CoinMatrix2 build_c2(const CoinParams& params) {
  if (!std::isfinite(params.theta) || !std::isfinite(params.beta) || !std::isfinite(params.gamma)) {
    throw InvalidParameter("coin angles must be finite");
  }
  const double c = std::cos(params.theta);
  const double s = std::sin(params.theta);
  Eigen::Matrix2cd m;
  m(0, 0) = c;
  m(0, 1) = s * std::polar(1.0, params.beta);
  m(1, 0) = s * std::polar(1.0, params.gamma);
  m(1, 1) = -c * std::polar(1.0, params.gamma + params.beta);
  return CoinMatrix2::from_matrix(m);
}

CoinMatrix2 hadamard() {
  return build_c2({std::numbers::pi / 4, 0.0, 0.0});
}

CoinMatrix2 kempe(double theta) {
  // Same as build_c2(theta, pi/2, pi/2) up to rounding, with exact zeros.
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  Eigen::Matrix2cd m;
  m << Complex(c, 0), Complex(0, s), Complex(0, s), Complex(c, 0);
  return CoinMatrix2::from_matrix(m);
}

CoinMatrix4 cnot() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = 1;
  m(1, 1) = 1;
  m(2, 3) = 1;
  m(3, 2) = 1;
  return CoinMatrix4::from_matrix(m);
}

CoinMatrix4 separable_coin(const CoinMatrix2& a, const CoinMatrix2& b) {
  Eigen::Matrix4cd m;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) m(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return CoinMatrix4::from_matrix(m);
}

CoinMatrix4 entangling_coin(const CoinMatrix2& a, const CoinMatrix2& b) {
  const Eigen::Matrix4cd m = separable_coin(a, b).matrix() * cnot().matrix();
  return CoinMatrix4::from_matrix(m);
}

}  // namespace qwalk
