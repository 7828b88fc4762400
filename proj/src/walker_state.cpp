#include "qwalk/walker_state.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>

#include <fmt/format.h>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

template <std::size_t N>
bool negligible(const std::array<Complex, N>& a) {
  constexpr double cut = kPruneThreshold * kPruneThreshold;
  for (const auto& c : a)
    if (std::norm(c) >= cut) return false;
  return true;
}

template <std::size_t N>
double squared_norm(const std::array<Complex, N>& a) {
  double s = 0.0;
  for (const auto& c : a) s += std::norm(c);
  return s;
}

}  // namespace

double JointDistribution::probability(const Site& s) const {
  auto it = std::lower_bound(sites.begin(), sites.end(), s);
  if (it == sites.end() || *it != s) return 0.0;
  return p[static_cast<std::size_t>(it - sites.begin())];
}

double LineDistribution::probability(std::int64_t at) const {
  auto it = std::lower_bound(x.begin(), x.end(), at);
  if (it == x.end() || *it != at) return 0.0;
  return p[static_cast<std::size_t>(it - x.begin())];
}

SparseState SparseState::init_localized(const Site& origin, const Amplitude4& coin) {
  const double norm = std::sqrt(squared_norm(coin));
  if (!(std::abs(norm - 1.0) <= kInitialNormTolerance)) {
    throw InvalidState(fmt::format("initial coin must have unit norm, got {:.17g}", norm));
  }
  SparseState s;
  s.sites_.push_back(origin);
  s.amps_.push_back(coin);
  return s;
}

SparseState SparseState::from_entries(std::vector<std::pair<Site, Amplitude4>> entries,
                                      std::int64_t time) {
  std::sort(entries.begin(), entries.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  SparseState s;
  s.time_ = time;
  for (auto& [site, amp] : entries) {
    if (!s.sites_.empty() && s.sites_.back() == site) {
      for (int c = 0; c < 4; ++c) s.amps_.back()[c] += amp[c];
    } else {
      s.sites_.push_back(site);
      s.amps_.push_back(amp);
    }
  }
  return s;
}

Amplitude4 SparseState::amplitude(const Site& s) const {
  auto it = std::lower_bound(sites_.begin(), sites_.end(), s);
  if (it == sites_.end() || *it != s) return {};
  return amps_[static_cast<std::size_t>(it - sites_.begin())];
}

double SparseState::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amps_) total += squared_norm(a);
  return total;
}

void SparseState::apply_coin(const CoinMatrix4& c) {
  const Eigen::Matrix4cd& m = c.matrix();
  for (auto& a : amps_) {
    Amplitude4 out{};
    for (int r = 0; r < 4; ++r) {
      out[r] = m(r, 0) * a[0] + m(r, 1) * a[1] + m(r, 2) * a[2] + m(r, 3) * a[3];
    }
    a = out;
  }
}

void SparseState::apply_shift(std::int64_t d1, std::int64_t d2) {
  if (d1 < 1 || d2 < 1) {
    throw InvalidParameter(fmt::format("step sizes must be >= 1, got ({}, {})", d1, d2));
  }
  // Each component is a rigid translation of the sorted site list, so it stays
  // sorted; the new state is a four-way merge of the translated lists.
  const std::size_t n = sites_.size();
  std::array<Site, 4> offset;
  for (int c = 0; c < 4; ++c) offset[c] = {kSign1[c] * d1, kSign2[c] * d2};

  std::array<std::size_t, 4> cursor{};
  auto skip_zeros = [&](int c) {
    while (cursor[c] < n && amps_[cursor[c]][c] == Complex(0.0, 0.0)) ++cursor[c];
  };
  for (int c = 0; c < 4; ++c) skip_zeros(c);

  std::vector<Site> sites;
  std::vector<Amplitude4> amps;
  sites.reserve(n + n / 2 + 4);
  amps.reserve(n + n / 2 + 4);

  while (true) {
    bool any = false;
    Site best{};
    std::array<Site, 4> key;
    for (int c = 0; c < 4; ++c) {
      if (cursor[c] >= n) continue;
      const Site& s = sites_[cursor[c]];
      key[c] = {s.x1 + offset[c].x1, s.x2 + offset[c].x2};
      if (!any || key[c] < best) {
        best = key[c];
        any = true;
      }
    }
    if (!any) break;
    Amplitude4 a{};
    for (int c = 0; c < 4; ++c) {
      if (cursor[c] < n && key[c] == best) {
        a[c] = amps_[cursor[c]][c];
        ++cursor[c];
        skip_zeros(c);
      }
    }
    if (!negligible(a)) {
      sites.push_back(best);
      amps.push_back(a);
    }
  }
  sites_ = std::move(sites);
  amps_ = std::move(amps);
  ++time_;
}

JointDistribution SparseState::joint_distribution() const {
  JointDistribution out;
  out.sites.reserve(sites_.size());
  out.p.reserve(sites_.size());
  for (std::size_t i = 0; i < sites_.size(); ++i) {
    const double p = squared_norm(amps_[i]);
    if (p > 0.0) {
      out.sites.push_back(sites_[i]);
      out.p.push_back(p);
    }
  }
  return out;
}

LineState LineState::init_localized(std::int64_t origin, const Amplitude2& coin) {
  const double norm = std::sqrt(squared_norm(coin));
  if (!(std::abs(norm - 1.0) <= kInitialNormTolerance)) {
    throw InvalidState(fmt::format("initial coin must have unit norm, got {:.17g}", norm));
  }
  LineState s;
  s.x_.push_back(origin);
  s.amps_.push_back(coin);
  return s;
}

Amplitude2 LineState::amplitude(std::int64_t x) const {
  auto it = std::lower_bound(x_.begin(), x_.end(), x);
  if (it == x_.end() || *it != x) return {};
  return amps_[static_cast<std::size_t>(it - x_.begin())];
}

double LineState::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amps_) total += squared_norm(a);
  return total;
}

void LineState::apply_coin(const CoinMatrix2& c) {
  for (auto& a : amps_) {
    const Complex up = c(0, 0) * a[0] + c(0, 1) * a[1];
    const Complex down = c(1, 0) * a[0] + c(1, 1) * a[1];
    a = {up, down};
  }
}

void LineState::apply_shift(std::int64_t d) {
  if (d < 1) throw InvalidParameter(fmt::format("step size must be >= 1, got {}", d));
  constexpr auto kFar = std::numeric_limits<std::int64_t>::max();
  const std::size_t n = x_.size();
  std::size_t up = 0;
  std::size_t down = 0;
  std::vector<std::int64_t> xs;
  std::vector<Amplitude2> amps;
  xs.reserve(n + 2);
  amps.reserve(n + 2);
  while (up < n || down < n) {
    const std::int64_t ku = up < n ? x_[up] + d : kFar;
    const std::int64_t kd = down < n ? x_[down] - d : kFar;
    const std::int64_t best = std::min(ku, kd);
    Amplitude2 a{};
    if (up < n && ku == best) a[0] = amps_[up++][0];
    if (down < n && kd == best) a[1] = amps_[down++][1];
    if (!negligible(a)) {
      xs.push_back(best);
      amps.push_back(a);
    }
  }
  x_ = std::move(xs);
  amps_ = std::move(amps);
  ++time_;
}

LineDistribution LineState::distribution() const {
  LineDistribution out;
  for (std::size_t i = 0; i < x_.size(); ++i) {
    const double p = squared_norm(amps_[i]);
    if (p > 0.0) {
      out.x.push_back(x_[i]);
      out.p.push_back(p);
    }
  }
  return out;
}

void write_snapshot(std::ostream& out, const SparseState& state) {
  out << "# qwalk-snapshot v1\n";
  out << fmt::format("# t={} sites={}\n", state.time(), state.size());
  out << "x1,x2,re0,im0,re1,im1,re2,im2,re3,im3\n";
  const auto sites = state.sites();
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    const auto& a = amps[i];
    out << fmt::format("{},{},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g},{:.17g}\n",
                       sites[i].x1, sites[i].x2, a[0].real(), a[0].imag(), a[1].real(), a[1].imag(),
                       a[2].real(), a[2].imag(), a[3].real(), a[3].imag());
  }
}

}  // namespace qwalk
