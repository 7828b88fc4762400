#include "qwalk/step_distribution.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include <fmt/format.h>

#include "qwalk/errors.hpp"

namespace qwalk {

QParam QParam::finite(double q) {
  if (std::isnan(q) || q < 0.0) {
    throw InvalidParameter(fmt::format("q must be a nonnegative number or inf, got {}", q));
  }
  QParam p;
  if (std::isinf(q)) {
    p.infinite_ = true;
    p.q_ = 0.0;
  } else {
    p.q_ = q;
  }
  return p;
}

QParam QParam::infinity() {
  QParam p;
  p.infinite_ = true;
  p.q_ = 0.0;
  return p;
}

QParam QParam::parse(std::string_view text) {
  while (!text.empty() && (text.front() == ' ' || text.front() == '"')) text.remove_prefix(1);
  while (!text.empty() && (text.back() == ' ' || text.back() == '"')) text.remove_suffix(1);
  if (text == "inf" || text == "INFINITY" || text == "infinity" || text == "Inf") return infinity();
  double q = 0.0;
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, q);
  if (ec != std::errc() || ptr != end || !std::isfinite(q)) {
    throw InvalidParameter(fmt::format("cannot parse q value '{}'", text));
  }
  return finite(q);
}

double QParam::value() const {
  return infinite_ ? std::numeric_limits<double>::infinity() : q_;
}

std::string QParam::to_string() const {
  if (infinite_) return "inf";
  return fmt::format("{}", q_);
}

namespace {

// log of the unnormalized weight; -inf outside the support.
double log_weight(double q, double step) {
  if (q == 1.0) return -step;
  if (q < 1.0) {
    const double bracket = 1.0 - (1.0 - q) * step;
    if (bracket <= 0.0) return -std::numeric_limits<double>::infinity();
    return std::log1p(-(1.0 - q) * step) / (1.0 - q);
  }
  return -std::log1p((q - 1.0) * step) / (q - 1.0);
}

}  // namespace

StepWeights weights(const QExpParams& params) {
  if (params.t < 1) throw InvalidParameter(fmt::format("step index t must be >= 1, got {}", params.t));
  const auto n = static_cast<std::size_t>(params.t);
  StepWeights out;
  out.probabilities.assign(n, 0.0);

  if (params.q.is_infinite()) {
    std::fill(out.probabilities.begin(), out.probabilities.end(), 1.0 / static_cast<double>(n));
    out.normalization = 1.0 / static_cast<double>(n);
    return out;
  }

  const double q = params.q.value();
  std::vector<double> logs(n);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    logs[i] = log_weight(q, static_cast<double>(i + 1));
    top = std::max(top, logs[i]);
  }
  if (!std::isfinite(top)) {
    throw DegenerateDistribution(fmt::format(
        "q = {} leaves no admissible step size: the support [0, 1/(1-q)) contains no integer >= 1", q));
  }
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.probabilities[i] = std::isfinite(logs[i]) ? std::exp(logs[i] - top) : 0.0;
    total += out.probabilities[i];
  }
  for (double& p : out.probabilities) p /= total;
  // Pr = tau * w with w the raw weight: tau = exp(-top) / total.
  out.normalization = std::exp(-top) / total;
  return out;
}

void check_support(const QParam& q) {
  (void)weights({q, 1});
}

double RandomStream::uniform() {
  ++draws_;
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  return splitmix64(seed ^ splitmix64(index));
}

std::int64_t sample(const QExpParams& params, RandomStream& rng) {
  const StepWeights w = weights(params);
  const double u = rng.uniform();
  double cumulative = 0.0;
  const auto n = w.probabilities.size();
  for (std::size_t i = 0; i + 1 < n; ++i) {
    cumulative += w.probabilities[i];
    if (u < cumulative) return static_cast<std::int64_t>(i + 1);
  }
  // Guard against rounding in the running sum: return the largest step with
  // nonzero probability.
  for (std::size_t i = n; i-- > 0;) {
    if (w.probabilities[i] > 0.0) return static_cast<std::int64_t>(i + 1);
  }
  return 1;
}

}  // namespace qwalk
