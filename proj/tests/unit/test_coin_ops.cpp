#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "qwalk/coin_ops.hpp"
#include "qwalk/errors.hpp"

using namespace qwalk;
using std::numbers::pi;

namespace {

const Complex I(0.0, 1.0);
const double r2 = 1.0 / std::sqrt(2.0);

double max_diff(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Kronecker product written out index by index, independent of the library.
Eigen::Matrix4cd kron(const Eigen::Matrix2cd& a, const Eigen::Matrix2cd& b) {
  Eigen::Matrix4cd k;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int p = 0; p < 2; ++p)
        for (int q = 0; q < 2; ++q) k(2 * i + p, 2 * j + q) = a(i, j) * b(p, q);
  return k;
}

Eigen::Matrix4cd cnot_matrix() {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = m(1, 1) = 1.0;
  m(2, 3) = m(3, 2) = 1.0;
  return m;
}

}  // namespace

TEST_CASE("build_c2 reproduces the Hadamard, Kempe and trivial coins") {
  Eigen::Matrix2cd h;
  h << r2, r2, r2, -r2;
  CHECK(max_diff(build_c2({pi / 4, 0, 0}).matrix(), h) < 1e-15);
  CHECK(max_diff(hadamard().matrix(), h) < 1e-15);

  Eigen::Matrix2cd k;
  k << r2, I * r2, I * r2, r2;
  CHECK(max_diff(build_c2({pi / 4, pi / 2, pi / 2}).matrix(), k) < 1e-15);

  Eigen::Matrix2cd z;
  z << 1, 0, 0, -1;
  CHECK(max_diff(build_c2({0, 0, 0}).matrix(), z) == 0.0);
}

TEST_CASE("kempe(theta) equals build_c2(theta, pi/2, pi/2) for random theta") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, pi / 2);
  for (int i = 0; i < 20; ++i) {
    const double th = u(rng);
    Eigen::Matrix2cd expected;
    expected << std::cos(th), I * std::sin(th), I * std::sin(th), std::cos(th);
    CHECK(max_diff(kempe(th).matrix(), expected) < 1e-15);
    CHECK(max_diff(build_c2({th, pi / 2, pi / 2}).matrix(), expected) < 1e-15);
  }
}

TEST_CASE("build_c2 is unitary and rejects non-finite angles") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    CHECK(unitarity_defect(build_c2({u(rng), u(rng), u(rng)}).matrix()) < kUnitarityTolerance);
  }
  CHECK_THROWS_AS(build_c2({NAN, 0, 0}), InvalidParameter);
  CHECK_THROWS_AS(build_c2({0, INFINITY, 0}), InvalidParameter);
}

TEST_CASE("canonical angles give the same coin up to a global sign") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  for (int i = 0; i < 50; ++i) {
    const CoinParams p{u(rng), u(rng), u(rng)};
    const CoinParams c = p.canonical();
    CHECK(c.theta >= 0.0);
    CHECK(c.theta <= pi / 2 + 1e-15);
    CHECK(c.beta >= 0.0);
    CHECK(c.beta < 2 * pi);
    CHECK(c.gamma >= 0.0);
    CHECK(c.gamma < 2 * pi);
    const Eigen::Matrix2cd a = build_c2(p).matrix();
    const Eigen::Matrix2cd b = build_c2(c).matrix();
    CHECK(std::min(max_diff(a, b), max_diff(a, -b)) < 1e-12);
  }
}

TEST_CASE("from_matrix rejects non-unitary input") {
  Eigen::Matrix2cd m;
  m << 1, 1, 0, 1;
  CHECK_THROWS_AS(CoinMatrix2::from_matrix(m), InvalidOperator);
  CHECK_THROWS_AS(CoinMatrix4::from_matrix(2.0 * Eigen::Matrix4cd::Identity()), InvalidOperator);
}

TEST_CASE("separable coin is the Kronecker product") {
  CHECK(max_diff(separable_coin(CoinMatrix2(), CoinMatrix2()).matrix(), Eigen::Matrix4cd::Identity()) == 0.0);

  const Eigen::Matrix4cd hh = separable_coin(hadamard(), hadamard()).matrix();
  const int sign[2][2] = {{1, 1}, {1, -1}};
  for (int r = 0; r < 4; ++r) {
    for (int c = 0; c < 4; ++c) {
      const double expected = 0.5 * sign[r / 2][c / 2] * sign[r % 2][c % 2];
      CHECK(std::abs(hh(r, c) - expected) < 1e-15);
    }
  }

  const Eigen::Matrix4cd kk = separable_coin(kempe(pi / 4), kempe(pi / 4)).matrix();
  const Complex row[4] = {0.5, 0.5 * I, 0.5 * I, -0.5};
  for (int c = 0; c < 4; ++c) CHECK(std::abs(kk(0, c) - row[c]) < 1e-15);

  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  for (int i = 0; i < 20; ++i) {
    const CoinMatrix2 a = build_c2({u(rng), u(rng), u(rng)});
    const CoinMatrix2 b = build_c2({u(rng), u(rng), u(rng)});
    CHECK(max_diff(separable_coin(a, b).matrix(), kron(a.matrix(), b.matrix())) < 1e-15);
    CHECK(unitarity_defect(separable_coin(a, b).matrix()) < kUnitarityTolerance);
  }
}

TEST_CASE("entangling coin is (a (x) b) CNOT") {
  CHECK(max_diff(entangling_coin(CoinMatrix2(), CoinMatrix2()).matrix(), cnot_matrix()) == 0.0);
  CHECK(max_diff(cnot().matrix(), cnot_matrix()) == 0.0);

  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(0.0, 6.0);
  for (int i = 0; i < 20; ++i) {
    const CoinMatrix2 a = build_c2({u(rng), u(rng), u(rng)});
    const CoinMatrix2 b = build_c2({u(rng), u(rng), u(rng)});
    const Eigen::Matrix4cd e = entangling_coin(a, b).matrix();
    const Eigen::Matrix4cd s = kron(a.matrix(), b.matrix());
    CHECK(max_diff(e, s * cnot_matrix()) < 1e-15);
    CHECK(unitarity_defect(e) < kUnitarityTolerance);

    // |down, up> is sent to (a (x) b)|down, down>.
    Eigen::Vector4cd du = Eigen::Vector4cd::Zero();
    du(2) = 1.0;
    Eigen::Vector4cd dd = Eigen::Vector4cd::Zero();
    dd(3) = 1.0;
    CHECK((e * du - s * dd).cwiseAbs().maxCoeff() < 1e-15);

    // The uniform superposition is a CNOT fixed point.
    const Eigen::Vector4cd uni = Eigen::Vector4cd::Constant(0.5);
    CHECK((e * uni - separable_coin(a, b).matrix() * uni).cwiseAbs().maxCoeff() < 1e-15);
  }
}
