#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "qwalk/errors.hpp"
#include "qwalk/observables.hpp"

using namespace qwalk;

namespace {

const Amplitude4 kUniform = {0.5, 0.5, 0.5, 0.5};

JointDistribution joint(std::map<std::pair<std::int64_t, std::int64_t>, double> m) {
  JointDistribution j;
  for (const auto& [s, p] : m) {
    j.sites.push_back({s.first, s.second});
    j.p.push_back(p);
  }
  return j;
}

LineDistribution line(std::map<std::int64_t, double> m) {
  LineDistribution l;
  for (const auto& [x, p] : m) {
    l.x.push_back(x);
    l.p.push_back(p);
  }
  return l;
}

JointDistribution random_joint(std::mt19937_64& rng, int n) {
  std::uniform_int_distribution<std::int64_t> coord(-4, 4);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::map<std::pair<std::int64_t, std::int64_t>, double> m;
  for (int i = 0; i < n; ++i) m[{coord(rng), coord(rng)}] += u(rng);
  double total = 0.0;
  for (const auto& kv : m) total += kv.second;
  for (auto& kv : m) kv.second /= total;
  return joint(m);
}

DensityMatrix dm(const Eigen::MatrixXcd& m) {
  std::vector<std::int64_t> labels(static_cast<std::size_t>(m.rows()));
  for (std::size_t i = 0; i < labels.size(); ++i) labels[i] = static_cast<std::int64_t>(i);
  return DensityMatrix(m, labels);
}

DensityMatrix pure(const Eigen::VectorXcd& v) { return dm(v * v.adjoint()); }

SparseState one_kempe_step(bool entangling) {
  const CoinMatrix2 k = kempe(std::numbers::pi / 4);
  SparseState s = SparseState::init_localized({0, 0}, kUniform);
  s.apply_coin(entangling ? entangling_coin(k, k) : separable_coin(k, k));
  s.apply_shift(1, 1);
  return s;
}

}  // namespace

TEST_CASE("marginals") {
  auto [a, b] = marginals(joint({{{0, 0}, 1.0}}));
  CHECK(a.probability(0) == 1.0);
  CHECK(b.probability(0) == 1.0);

  auto [m1, m2] = marginals(joint({{{-1, -1}, 0.25}, {{-1, 1}, 0.25}, {{1, -1}, 0.25}, {{1, 1}, 0.25}}));
  CHECK(m1.size() == 2);
  CHECK(m1.probability(-1) == 0.5);
  CHECK(m1.probability(1) == 0.5);
  CHECK(m2.probability(-1) == 0.5);
  CHECK(m2.probability(1) == 0.5);

  std::mt19937_64 rng(4);
  for (int i = 0; i < 20; ++i) {
    const auto [p, q] = marginals(random_joint(rng, 30));
    double sp = 0.0, sq = 0.0;
    for (double v : p.p) sp += v;
    for (double v : q.p) sq += v;
    CHECK(sp == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(sq == doctest::Approx(1.0).epsilon(1e-12));
    for (std::size_t k = 1; k < q.x.size(); ++k) CHECK(q.x[k - 1] < q.x[k]);
  }
}

TEST_CASE("variance and moments") {
  CHECK(variance(line({{0, 1.0}})) == 0.0);
  CHECK(variance(line({{-1, 0.5}, {1, 0.5}})) == 1.0);
  CHECK(variance(line({{-2, 0.25}, {0, 0.5}, {2, 0.25}})) == 2.0);
  CHECK(mean(line({{1, 0.5}, {3, 0.5}})) == 2.0);
  CHECK(excess_kurtosis(line({{0, 1.0}})) == 0.0);
  // Symmetric two-point law: m4 / m2^2 = 1.
  CHECK(excess_kurtosis(line({{-1, 0.5}, {1, 0.5}})) == doctest::Approx(-2.0));
}

TEST_CASE("trace distance: examples and metric properties") {
  const auto p = joint({{{0, 0}, 1.0}});
  CHECK(trace_distance(p, p) == 0.0);
  CHECK(trace_distance(p, joint({{{3, 3}, 1.0}})) == 1.0);
  CHECK(trace_distance(p, joint({{{0, 0}, 0.5}, {{1, 1}, 0.5}})) == 0.5);

  std::mt19937_64 rng(8);
  for (int i = 0; i < 100; ++i) {
    const auto a = random_joint(rng, 20), b = random_joint(rng, 20), c = random_joint(rng, 20);
    const double ab = trace_distance(a, b);
    CHECK(std::abs(ab - trace_distance(b, a)) < 1e-12);
    CHECK(ab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12);
    CHECK(ab >= 0.0);
    CHECK(ab <= 1.0 + 1e-12);
  }
}

TEST_CASE("separability distance equals the explicit product comparison") {
  std::mt19937_64 rng(10);
  for (int i = 0; i < 50; ++i) {
    const auto j = random_joint(rng, 25);
    const auto [m1, m2] = marginals(j);
    std::map<std::pair<std::int64_t, std::int64_t>, double> prod;
    for (std::size_t a = 0; a < m1.size(); ++a)
      for (std::size_t b = 0; b < m2.size(); ++b) prod[{m1.x[a], m2.x[b]}] = m1.p[a] * m2.p[b];
    CHECK(separability_distance(j) == doctest::Approx(trace_distance(j, joint(prod))).epsilon(1e-12));
  }
  CHECK(separability_distance(joint({{{-1, -1}, 0.25}, {{-1, 1}, 0.25}, {{1, -1}, 0.25}, {{1, 1}, 0.25}})) <
        1e-15);
  // Perfectly correlated: p = 1/2 on (-1,-1), (1,1); product is uniform on 4 corners.
  CHECK(separability_distance(joint({{{-1, -1}, 0.5}, {{1, 1}, 0.5}})) == doctest::Approx(0.5));
}

TEST_CASE("power-law fits") {
  std::vector<SeriesPoint> sq, cube, decay, flat;
  for (std::int64_t t = 1; t <= 100; ++t) {
    const double x = static_cast<double>(t);
    sq.push_back({t, x * x});
    cube.push_back({t, 3.0 * x * x * x});
    decay.push_back({t, std::pow(x, -0.4)});
    flat.push_back({t, 0.15});
  }
  const FitResult a = fit_dynamical_exponent(sq, {10, 100});
  CHECK(std::abs(a.exponent - 2.0) < 1e-12);
  CHECK(a.points == 91);
  CHECK(a.window.lo == 10);
  CHECK(a.residual < 1e-12);
  const FitResult b = fit_dynamical_exponent(cube, {1, 100});
  CHECK(std::abs(b.exponent - 3.0) < 1e-12);
  CHECK(std::abs(b.intercept - std::log(3.0)) < 1e-12);
  CHECK(std::abs(fit_coherence_decay(decay, {5, 100}).exponent - 0.4) < 1e-12);
  CHECK(std::abs(fit_coherence_decay(flat, {5, 100}).exponent) < 1e-12);

  CHECK_THROWS_AS(fit_dynamical_exponent(sq, {50, 51}), FitError);
  CHECK_THROWS_AS(fit_dynamical_exponent(sq, {60, 60}), FitError);
  std::vector<SeriesPoint> holes = {{1, 1.0}, {2, 0.0}, {3, -1.0}, {4, 16.0}};
  CHECK_THROWS_AS(fit_dynamical_exponent(holes, {1, 4}), FitError);
  holes.push_back({5, 25.0});
  CHECK(fit_dynamical_exponent(holes, {1, 5}).points == 3);
}

TEST_CASE("coin reductions") {
  const CoinReductions r = reduced_coin_density(SparseState::init_localized({0, 0}, {1, 0, 0, 0}));
  CHECK(r.coin.matrix()(0, 0) == Complex(1.0));
  CHECK(r.coin.matrix().cwiseAbs().sum() == 1.0);
  CHECK(entanglement_entropy(r.coin) == 0.0);

  const double h = std::numbers::sqrt2 / 2;
  const CoinReductions bell = reduced_coin_density(SparseState::init_localized({0, 0}, {h, 0, 0, h}));
  CHECK((bell.subcoin1.matrix() - 0.5 * Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((bell.subcoin2.matrix() - 0.5 * Eigen::Matrix2cd::Identity()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK(entanglement_entropy(bell.subcoin1) == doctest::Approx(1.0));

  // Partial traces follow the index layout 2 * s1 + s2.
  const CoinReductions prod = reduced_coin_density(SparseState::init_localized({0, 0}, {0, 0, 1, 0}));
  CHECK(prod.subcoin1.matrix()(1, 1) == Complex(1.0));
  CHECK(prod.subcoin2.matrix()(0, 0) == Complex(1.0));
}

TEST_CASE("entanglement entropy") {
  Eigen::VectorXcd v(2);
  v << 0.6, Complex(0.0, 0.8);
  CHECK(entanglement_entropy(pure(v)) < 1e-12);
  CHECK(entanglement_entropy(dm(0.5 * Eigen::MatrixXcd::Identity(2, 2))) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(entanglement_entropy(dm(0.25 * Eigen::MatrixXcd::Identity(4, 4))) == doctest::Approx(2.0).epsilon(1e-14));

  Eigen::MatrixXcd bad = Eigen::MatrixXcd::Zero(2, 2);
  bad(0, 0) = 1.1;
  bad(1, 1) = -0.1;
  CHECK_THROWS_AS(entanglement_entropy(dm(bad)), InvalidDensity);
  Eigen::MatrixXcd unnormalized = 0.6 * Eigen::MatrixXcd::Identity(2, 2);
  CHECK_THROWS_AS(entanglement_entropy(dm(unnormalized)), InvalidDensity);
  Eigen::MatrixXcd skew = 0.5 * Eigen::MatrixXcd::Identity(2, 2);
  skew(0, 1) = 0.1;
  CHECK_THROWS_AS(entanglement_entropy(dm(skew)), InvalidDensity);
}

TEST_CASE("negativity") {
  Eigen::VectorXcd product(4);
  product << 0.5, 0.5, Complex(0.0, 0.5), Complex(0.0, 0.5);
  CHECK(negativity(pure(product)) == 0.0);
  Eigen::VectorXcd bell(4);
  bell << std::numbers::sqrt2 / 2, 0, 0, std::numbers::sqrt2 / 2;
  CHECK(negativity(pure(bell)) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(negativity(dm(0.25 * Eigen::MatrixXcd::Identity(4, 4))) == 0.0);
  CHECK_THROWS_AS(negativity(dm(0.5 * Eigen::MatrixXcd::Identity(2, 2))), DimensionMismatch);

  // Negativity of cos a |00> + sin a |11> is |sin a cos a|.
  for (double a : {0.1, 0.4, 0.7, 1.2}) {
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(4);
    v(0) = std::cos(a);
    v(3) = std::sin(a);
    CHECK(negativity(pure(v)) == doctest::Approx(std::abs(std::sin(a) * std::cos(a))).epsilon(1e-12));
  }
}

TEST_CASE("position density of x1") {
  const DensityMatrix loc = reduced_position_density_x1(SparseState::init_localized({0, 0}, kUniform));
  CHECK(loc.dimension() == 1);
  CHECK(loc.matrix()(0, 0) == Complex(1.0));

  const DensityMatrix one = reduced_position_density_x1(one_kempe_step(false));
  REQUIRE(one.dimension() == 2);
  CHECK(one.labels() == std::vector<std::int64_t>{-1, 1});
  CHECK(one.matrix()(0, 0).real() == doctest::Approx(0.5));
  CHECK(one.matrix()(1, 1).real() == doctest::Approx(0.5));
  CHECK(std::abs(one.matrix()(0, 1)) < 1e-15);
}

TEST_CASE("position density agrees with a direct sum") {
  std::mt19937_64 rng(31);
  std::normal_distribution<double> n;
  std::uniform_int_distribution<std::int64_t> coord(-6, 6);
  std::map<std::pair<std::int64_t, std::int64_t>, Amplitude4> cells;
  for (int i = 0; i < 120; ++i) {
    Amplitude4 a;
    for (auto& c : a) c = Complex(n(rng), n(rng));
    cells[{coord(rng), coord(rng)}] = a;
  }
  std::vector<std::pair<Site, Amplitude4>> entries;
  double norm = 0.0;
  for (const auto& [xy, a] : cells) {
    entries.push_back({{xy.first, xy.second}, a});
    for (const auto& c : a) norm += std::norm(c);
  }
  for (auto& e : entries)
    for (auto& c : e.second) c /= std::sqrt(norm);
  const SparseState s = SparseState::from_entries(entries);

  const DensityMatrix rho = reduced_position_density_x1(s);
  const DensityMatrix rho_c1 = reduced_position_coin_density_x1(s);
  const auto& labels = rho.labels();
  double worst = 0.0, worst_c1 = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    for (std::size_t j = 0; j < labels.size(); ++j) {
      Complex direct = 0.0;
      Complex direct_c1[2][2] = {};
      for (std::int64_t x2 = -6; x2 <= 6; ++x2) {
        const Amplitude4 a = s.amplitude({labels[i], x2});
        const Amplitude4 b = s.amplitude({labels[j], x2});
        for (int c = 0; c < 4; ++c) direct += a[c] * std::conj(b[c]);
        for (int s1 = 0; s1 < 2; ++s1)
          for (int t1 = 0; t1 < 2; ++t1)
            for (int s2 = 0; s2 < 2; ++s2) direct_c1[s1][t1] += a[2 * s1 + s2] * std::conj(b[2 * t1 + s2]);
      }
      worst = std::max(worst, std::abs(rho.matrix()(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) - direct));
      for (int s1 = 0; s1 < 2; ++s1)
        for (int t1 = 0; t1 < 2; ++t1) {
          const auto r = static_cast<Eigen::Index>(2 * i + s1);
          const auto c = static_cast<Eigen::Index>(2 * j + t1);
          worst_c1 = std::max(worst_c1, std::abs(rho_c1.matrix()(r, c) - direct_c1[s1][t1]));
        }
    }
  }
  CHECK(worst < 1e-14);
  CHECK(worst_c1 < 1e-14);
  CHECK(rho.diagnostics().valid());
  CHECK(rho_c1.diagnostics().valid());
}

TEST_CASE("l1 coherence") {
  CHECK(l1_coherence(dm(0.5 * Eigen::MatrixXcd::Identity(2, 2)), 7) == 0.0);
  Eigen::MatrixXcd m(2, 2);
  m << 0.5, 0.5, 0.5, 0.5;
  CHECK(l1_coherence(dm(m), 1) == 0.5);
  CHECK(l1_coherence(dm(m), 4) == 0.125);
  CHECK_THROWS_AS(l1_coherence(dm(m), 0), InvalidParameter);
  // Only the strict upper triangle counts.
  Eigen::MatrixXcd u = Eigen::MatrixXcd::Constant(3, 3, Complex(1.0 / 3.0));
  CHECK(l1_coherence(dm(u), 1) == doctest::Approx(1.0));
}

TEST_CASE("density diagnostics") {
  const DensityMatrix good = dm(0.5 * Eigen::MatrixXcd::Identity(2, 2));
  CHECK(good.diagnostics().valid());
  CHECK_NOTHROW(good.validate());
  CHECK_THROWS_AS(DensityMatrix(Eigen::MatrixXcd::Identity(2, 3), {0, 1}), DimensionMismatch);
  CHECK_THROWS_AS(DensityMatrix(Eigen::MatrixXcd::Identity(2, 2), {0}), DimensionMismatch);
}
