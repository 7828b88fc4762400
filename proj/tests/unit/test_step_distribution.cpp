#include <doctest.h>

#include <cmath>
#include <vector>

#include "qwalk/errors.hpp"
#include "qwalk/step_distribution.hpp"

using namespace qwalk;

namespace {

// Direct evaluation of [1 - (1 - q) d]^(1 / (1 - q)) with the closed forms at
// q = 1 and q = inf; fine for the small t used here.
std::vector<double> reference_weights(double q, bool infinite, int t) {
  std::vector<double> w(static_cast<std::size_t>(t));
  double total = 0.0;
  for (int d = 1; d <= t; ++d) {
    double v;
    if (infinite) {
      v = 1.0;
    } else if (q == 1.0) {
      v = std::exp(-static_cast<double>(d));
    } else {
      const double bracket = 1.0 - (1.0 - q) * d;
      v = bracket > 0.0 ? std::pow(bracket, 1.0 / (1.0 - q)) : 0.0;
    }
    w[static_cast<std::size_t>(d - 1)] = v;
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

double sum(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s;
}

}  // namespace

TEST_CASE("weights: documented examples") {
  const StepWeights half = weights({QParam::finite(0.5), 5});
  REQUIRE(half.probabilities.size() == 5);
  CHECK(half.probabilities[0] == 1.0);
  for (int i = 1; i < 5; ++i) CHECK(half.probabilities[static_cast<std::size_t>(i)] == 0.0);

  const StepWeights uni = weights({QParam::infinity(), 4});
  for (double p : uni.probabilities) CHECK(p == doctest::Approx(0.25).epsilon(1e-15));

  const StepWeights one = weights({QParam::finite(1.0), 2});
  CHECK(one.probabilities[0] == doctest::Approx(0.7310585786300049).epsilon(1e-14));
  CHECK(one.probabilities[1] == doctest::Approx(0.2689414213699951).epsilon(1e-14));
}

TEST_CASE("weights agree with the direct formula") {
  for (double q : {0.3, 0.55, 0.7, 0.9, 1.0, 1.5, 2.0, 5.0}) {
    for (int t : {1, 2, 7, 30}) {
      const auto w = weights({QParam::finite(q), t}).probabilities;
      const auto ref = reference_weights(q, false, t);
      for (std::size_t i = 0; i < w.size(); ++i) CHECK(w[i] == doctest::Approx(ref[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("normalization tau turns raw weights into probabilities") {
  const StepWeights w = weights({QParam::finite(2.0), 10});
  for (int d = 1; d <= 10; ++d) {
    const double raw = 1.0 / (1.0 + d);  // [1 + (q - 1) d]^(-1 / (q - 1)) at q = 2
    CHECK(w.probabilities[static_cast<std::size_t>(d - 1)] == doctest::Approx(w.normalization * raw).epsilon(1e-13));
  }
}

TEST_CASE("probabilities sum to one over the documented grid") {
  std::vector<QParam> qs;
  for (double q : {0.3, 0.5, 0.55, 0.7, 1.0, 1.5, 2.0, 5.0}) qs.push_back(QParam::finite(q));
  qs.push_back(QParam::infinity());
  for (const auto& q : qs) {
    for (int t = 1; t <= 200; ++t) CHECK(std::abs(sum(weights({q, t}).probabilities) - 1.0) < 1e-12);
  }
}

TEST_CASE("support of q < 1 is exact zero outside [0, 1/(1-q))") {
  const auto w = weights({QParam::finite(0.7), 10}).probabilities;
  // 1/(1 - 0.7) = 3.33: steps 1..3 allowed.
  for (int d = 1; d <= 10; ++d) {
    if (d <= 3) CHECK(w[static_cast<std::size_t>(d - 1)] > 0.0);
    else CHECK(w[static_cast<std::size_t>(d - 1)] == 0.0);
  }
}

TEST_CASE("probabilities decrease strictly for q > 1") {
  for (double q : {1.2, 1.5, 2.0, 5.0}) {
    const auto w = weights({QParam::finite(q), 100}).probabilities;
    for (std::size_t i = 1; i < w.size(); ++i) CHECK(w[i] < w[i - 1]);
  }
}

TEST_CASE("weights are continuous in q at 1") {
  for (int t = 1; t <= 50; ++t) {
    const auto at = weights({QParam::finite(1.0), t}).probabilities;
    for (double q : {1.0 - 1e-6, 1.0 + 1e-6}) {
      const auto near = weights({QParam::finite(q), t}).probabilities;
      for (std::size_t i = 0; i < at.size(); ++i) CHECK(std::abs(near[i] - at[i]) < 1e-4);
    }
  }
}

TEST_CASE("large t and large q stay finite") {
  const auto w = weights({QParam::finite(1.5), 100000}).probabilities;
  CHECK(std::abs(sum(w) - 1.0) < 1e-12);
  const auto v = weights({QParam::finite(0.999), 5000}).probabilities;
  CHECK(std::abs(sum(v) - 1.0) < 1e-12);
}

TEST_CASE("q = 0 and invalid q are rejected") {
  CHECK_THROWS_AS(weights({QParam::finite(0.0), 5}), DegenerateDistribution);
  CHECK_THROWS_AS(check_support(QParam::finite(0.0)), DegenerateDistribution);
  CHECK_THROWS_AS(QParam::finite(-1.0), InvalidParameter);
  CHECK_THROWS_AS(QParam::finite(NAN), InvalidParameter);
  CHECK_THROWS_AS(weights({QParam::finite(0.5), 0}), InvalidParameter);
  // 0 < q <= 0.5 keeps step 1 only.
  CHECK(weights({QParam::finite(0.2), 4}).probabilities[0] == 1.0);
}

TEST_CASE("QParam parsing and printing") {
  CHECK(QParam::parse("inf").is_infinite());
  CHECK(QParam::parse("\"inf\"").is_infinite());
  CHECK(QParam::parse(" 1.5 ").value() == 1.5);
  CHECK(QParam::parse("0.5").to_string() == "0.5");
  CHECK(QParam::infinity().to_string() == "inf");
  CHECK(QParam::parse(QParam::finite(0.1).to_string()) == QParam::finite(0.1));
  CHECK_THROWS_AS(QParam::parse("abc"), InvalidParameter);
  CHECK_THROWS_AS(QParam::parse("-2"), InvalidParameter);
}

TEST_CASE("sample: forced and single-element supports") {
  RandomStream rng(42);
  for (int t = 1; t <= 50; ++t) CHECK(sample({QParam::finite(0.5), t}, rng) == 1);
  for (double q : {0.7, 1.0, 3.0}) CHECK(sample({QParam::finite(q), 1}, rng) == 1);
  CHECK(sample({QParam::infinity(), 1}, rng) == 1);
}

TEST_CASE("sample consumes exactly one variate and stays in range") {
  RandomStream rng(7);
  for (int i = 0; i < 1000; ++i) {
    const auto before = rng.draws();
    const auto d = sample({QParam::finite(1.5), 30}, rng);
    CHECK(rng.draws() == before + 1);
    CHECK(d >= 1);
    CHECK(d <= 30);
  }
}

TEST_CASE("uniform sampling matches its binomial model") {
  RandomStream rng(2024);
  const int n = 100000;
  std::vector<int> counts(10, 0);
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample({QParam::infinity(), 10}, rng) - 1)];
  const double sigma = std::sqrt(n * 0.1 * 0.9);
  for (int c : counts) CHECK(std::abs(c - 0.1 * n) < 5.0 * sigma);
}

TEST_CASE("q = 1 sampling matches the exponential law") {
  RandomStream rng(99);
  const int n = 100000;
  const auto p = weights({QParam::finite(1.0), 8}).probabilities;
  std::vector<int> counts(8, 0);
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample({QParam::finite(1.0), 8}, rng) - 1)];
  for (std::size_t d = 0; d < 8; ++d) {
    const double sigma = std::sqrt(n * p[d] * (1.0 - p[d])) + 1.0;
    CHECK(std::abs(counts[d] - n * p[d]) < 5.0 * sigma);
  }
}

TEST_CASE("streams are deterministic and seed-split streams differ") {
  RandomStream a(123), b(123);
  for (int i = 0; i < 100; ++i) CHECK(sample({QParam::infinity(), 1000}, a) == sample({QParam::infinity(), 1000}, b));
  CHECK(derive_seed(5, 0) != derive_seed(5, 1));
  CHECK(derive_seed(5, 0) == derive_seed(5, 0));
  // Reference values of the splitmix64 finalizer.
  CHECK(splitmix64(0) == 0xe220a8397b1dcdafULL);
  RandomStream u(1);
  const double x = u.uniform();
  CHECK(x >= 0.0);
  CHECK(x < 1.0);
}
