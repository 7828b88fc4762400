#include <doctest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <random>
#include <sstream>

#include "qwalk/errors.hpp"
#include "qwalk/walker_state.hpp"

using namespace qwalk;

namespace {

const Amplitude4 kUniform = {0.5, 0.5, 0.5, 0.5};

// Map-based walker used as an independent oracle.
using RefState = std::map<std::pair<std::int64_t, std::int64_t>, Amplitude4>;

RefState ref_step(const RefState& in, const Eigen::Matrix4cd& c, std::int64_t d1, std::int64_t d2) {
  RefState out;
  for (const auto& [site, a] : in) {
    for (int r = 0; r < 4; ++r) {
      Complex v = 0.0;
      for (int k = 0; k < 4; ++k) v += c(r, k) * a[k];
      const int s1 = r / 2, s2 = r % 2;
      const std::int64_t x1 = site.first + (s1 == 0 ? d1 : -d1);
      const std::int64_t x2 = site.second + (s2 == 0 ? d2 : -d2);
      out[{x1, x2}][r] += v;
    }
  }
  return out;
}

double diff(const SparseState& s, const RefState& ref) {
  double worst = 0.0;
  for (const auto& [site, a] : ref) {
    const Amplitude4 b = s.amplitude({site.first, site.second});
    for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(a[k] - b[k]));
  }
  for (std::size_t i = 0; i < s.size(); ++i) {
    const auto& site = s.sites()[i];
    if (!ref.count({site.x1, site.x2})) {
      for (int k = 0; k < 4; ++k) worst = std::max(worst, std::abs(s.amplitudes()[i][k]));
    }
  }
  return worst;
}

Eigen::Matrix4cd random_unitary(std::mt19937_64& rng) {
  std::normal_distribution<double> n;
  Eigen::Matrix4cd m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = Complex(n(rng), n(rng));
  Eigen::HouseholderQR<Eigen::Matrix4cd> qr(m);
  return qr.householderQ() * Eigen::Matrix4cd::Identity();
}

}  // namespace

TEST_CASE("init_localized") {
  const SparseState s = SparseState::init_localized({0, 0}, {1, 0, 0, 0});
  CHECK(s.size() == 1);
  CHECK(s.time() == 0);
  CHECK(s.norm_squared() == 1.0);
  CHECK(SparseState::init_localized({3, -2}, kUniform).amplitude({3, -2})[2] == Complex(0.5));
  CHECK_THROWS_AS(SparseState::init_localized({0, 0}, {1, 1, 0, 0}), InvalidState);
  CHECK_THROWS_AS(LineState::init_localized(0, {1, 1}), InvalidState);
}

TEST_CASE("apply_coin acts sitewise") {
  SparseState s = SparseState::init_localized({0, 0}, {1, 0, 0, 0});
  s.apply_coin(CoinMatrix4());
  CHECK(s.amplitude({0, 0})[0] == Complex(1.0));
  s.apply_coin(cnot());
  CHECK(s.amplitude({0, 0})[0] == Complex(1.0));

  SparseState t = SparseState::init_localized({0, 0}, {0, 0, 1, 0});
  t.apply_coin(cnot());
  const Amplitude4 a = t.amplitude({0, 0});
  CHECK(a[2] == Complex(0.0));
  CHECK(a[3] == Complex(1.0));
  CHECK(t.size() == 1);
}

TEST_CASE("apply_shift moves each component diagonally") {
  SparseState s = SparseState::init_localized({0, 0}, {1, 0, 0, 0});
  s.apply_shift(1, 1);
  CHECK(s.size() == 1);
  CHECK(s.sites()[0] == Site{1, 1});
  CHECK(s.time() == 1);

  SparseState u = SparseState::init_localized({0, 0}, kUniform);
  u.apply_shift(2, 3);
  REQUIRE(u.size() == 4);
  CHECK(u.amplitude({2, 3})[0] == Complex(0.5));
  CHECK(u.amplitude({2, -3})[1] == Complex(0.5));
  CHECK(u.amplitude({-2, 3})[2] == Complex(0.5));
  CHECK(u.amplitude({-2, -3})[3] == Complex(0.5));
  for (std::size_t i = 0; i < 4; ++i) {
    int nonzero = 0;
    for (const auto& c : u.amplitudes()[i]) nonzero += c != Complex(0.0);
    CHECK(nonzero == 1);
  }
  CHECK_THROWS_AS(u.apply_shift(0, 1), InvalidParameter);
}

TEST_CASE("colliding images add as complex amplitudes") {
  // |up,up> at (-1,-1) and |down,down> at (1,1) both land on (0,0).
  SparseState s = SparseState::from_entries({{{-1, -1}, {Complex(0.6, 0.0), 0, 0, 0}},
                                             {{1, 1}, {0, 0, 0, Complex(0.0, 0.8)}}});
  s.apply_shift(1, 1);
  REQUIRE(s.size() == 1);
  const Amplitude4 a = s.amplitude({0, 0});
  CHECK(a[0] == Complex(0.6, 0.0));
  CHECK(a[3] == Complex(0.0, 0.8));
}

TEST_CASE("sparse evolution matches the map-based oracle") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> step(1, 4);
  SparseState s = SparseState::init_localized({0, 0}, kUniform);
  RefState ref{{{0, 0}, kUniform}};
  for (int t = 0; t < 12; ++t) {
    const Eigen::Matrix4cd c = random_unitary(rng);
    const auto d1 = step(rng), d2 = step(rng);
    s.apply_coin(CoinMatrix4::from_matrix(c));
    s.apply_shift(d1, d2);
    ref = ref_step(ref, c, d1, d2);
    CHECK(diff(s, ref) < 1e-13);
  }
  // Sites are kept sorted.
  for (std::size_t i = 1; i < s.size(); ++i) CHECK(s.sites()[i - 1] < s.sites()[i]);
}

TEST_CASE("norm drift over 500 random coins and steps") {
  std::mt19937_64 rng(17);
  std::uniform_int_distribution<std::int64_t> step(1, 2);
  std::bernoulli_distribution rare(0.15);
  SparseState s = SparseState::init_localized({0, 0}, kUniform);
  for (int t = 0; t < 500; ++t) {
    s.apply_coin(CoinMatrix4::from_matrix(random_unitary(rng)));
    s.apply_shift(rare(rng) ? 2 : 1, rare(rng) ? 2 : 1);
  }
  CHECK(std::abs(s.norm_squared() - 1.0) < 1e-10);
  CHECK(s.time() == 500);
}

TEST_CASE("shift is a bijection: relabeling back recovers the state") {
  std::mt19937_64 rng(23);
  std::normal_distribution<double> n;
  std::vector<std::pair<Site, Amplitude4>> entries;
  for (int i = 0; i < 40; ++i) {
    Amplitude4 a;
    for (auto& c : a) c = Complex(n(rng), n(rng));
    entries.push_back({{static_cast<std::int64_t>(i % 7) - 3, static_cast<std::int64_t>(i / 7) - 3}, a});
  }
  const SparseState original = SparseState::from_entries(entries);
  SparseState moved = original;
  moved.apply_shift(3, 5);
  std::vector<std::pair<Site, Amplitude4>> back;
  for (std::size_t i = 0; i < moved.size(); ++i) {
    const Site y = moved.sites()[i];
    for (int s = 0; s < 4; ++s) {
      if (moved.amplitudes()[i][s] == Complex(0.0)) continue;
      Amplitude4 a{};
      a[s] = moved.amplitudes()[i][s];
      back.push_back({{y.x1 - kSign1[s] * 3, y.x2 - kSign2[s] * 5}, a});
    }
  }
  const SparseState restored = SparseState::from_entries(back);
  REQUIRE(restored.size() == original.size());
  for (std::size_t i = 0; i < original.size(); ++i) {
    CHECK(restored.sites()[i] == original.sites()[i]);
    for (int s = 0; s < 4; ++s) CHECK(restored.amplitudes()[i][s] == original.amplitudes()[i][s]);
  }
}

TEST_CASE("joint distribution") {
  CHECK(SparseState::init_localized({0, 0}, kUniform).joint_distribution().probability({0, 0}) == 1.0);

  const CoinMatrix2 k = kempe(std::numbers::pi / 4);
  for (const CoinMatrix4& c : {separable_coin(k, k), entangling_coin(k, k)}) {
    SparseState s = SparseState::init_localized({0, 0}, kUniform);
    s.apply_coin(c);
    s.apply_shift(1, 1);
    const JointDistribution j = s.joint_distribution();
    REQUIRE(j.size() == 4);
    for (std::int64_t a : {-1, 1})
      for (std::int64_t b : {-1, 1}) CHECK(j.probability({a, b}) == doctest::Approx(0.25).epsilon(1e-15));
  }
}

TEST_CASE("entries below the pruning threshold are dropped") {
  SparseState s = SparseState::from_entries({{{0, 0}, {1e-17, 0, 0, 0}}, {{4, 4}, {1, 0, 0, 0}}});
  s.apply_shift(1, 1);
  CHECK(s.size() == 1);
  CHECK(s.sites()[0] == Site{5, 5});
}

TEST_CASE("line walker shift and coin") {
  LineState l = LineState::init_localized(0, {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2});
  l.apply_shift(3);
  REQUIRE(l.size() == 2);
  CHECK(l.positions()[0] == -3);
  CHECK(l.positions()[1] == 3);
  CHECK(l.amplitude(3)[0].real() == doctest::Approx(std::numbers::sqrt2 / 2));
  l.apply_coin(hadamard());
  l.apply_shift(1);
  CHECK(l.norm_squared() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(l.time() == 2);
  const LineDistribution d = l.distribution();
  double total = 0.0;
  for (double p : d.p) total += p;
  CHECK(total == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("snapshot format") {
  SparseState s = SparseState::init_localized({0, 0}, kUniform);
  s.apply_shift(1, 2);
  std::ostringstream out;
  write_snapshot(out, s);
  std::istringstream in(out.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "# qwalk-snapshot v1");
  std::getline(in, line);
  CHECK(line == "# t=1 sites=4");
  std::getline(in, line);
  CHECK(line == "x1,x2,re0,im0,re1,im1,re2,im2,re3,im3");
  std::getline(in, line);
  CHECK(line == "-1,-2,0,0,0,0,0,0,0.5,0");
  int rows = 1;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 4);
}
