#include "qwalk/observables.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <fmt/format.h>

#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

// Position reductions are materialized densely; beyond this many basis
// states the matrix no longer fits a desk machine.
constexpr std::size_t kMaxDenseReduction = 16384;
constexpr Eigen::Index kRankUpdateBlock = 256;

// Dense accumulator over an integer range, falling back to sorting when the
// range is much wider than the number of samples.
LineDistribution accumulate_line(std::vector<std::pair<std::int64_t, double>> samples) {
  LineDistribution out;
  if (samples.empty()) return out;
  auto [lo_it, hi_it] = std::minmax_element(samples.begin(), samples.end(),
                                            [](auto& a, auto& b) { return a.first < b.first; });
  const std::int64_t lo = lo_it->first;
  const std::int64_t hi = hi_it->first;
  const auto range = static_cast<std::size_t>(hi - lo) + 1;
  if (range <= 8 * samples.size() + 1024) {
    std::vector<double> bins(range, 0.0);
    std::vector<char> hit(range, 0);
    for (const auto& [x, p] : samples) {
      bins[static_cast<std::size_t>(x - lo)] += p;
      hit[static_cast<std::size_t>(x - lo)] = 1;
    }
    for (std::size_t i = 0; i < range; ++i) {
      if (hit[i]) {
        out.x.push_back(lo + static_cast<std::int64_t>(i));
        out.p.push_back(bins[i]);
      }
    }
    return out;
  }
  std::stable_sort(samples.begin(), samples.end(),
                   [](auto& a, auto& b) { return a.first < b.first; });
  for (const auto& [x, p] : samples) {
    if (!out.x.empty() && out.x.back() == x) {
      out.p.back() += p;
    } else {
      out.x.push_back(x);
      out.p.push_back(p);
    }
  }
  return out;
}

// Lookup table for a line distribution over its own [min, max] range.
class DenseLine {
 public:
  explicit DenseLine(const LineDistribution& d) {
    if (d.x.empty()) return;
    lo_ = d.x.front();
    values_.assign(static_cast<std::size_t>(d.x.back() - lo_) + 1, 0.0);
    for (std::size_t i = 0; i < d.x.size(); ++i) values_[static_cast<std::size_t>(d.x[i] - lo_)] = d.p[i];
  }
  double operator()(std::int64_t x) const {
    if (values_.empty() || x < lo_) return 0.0;
    const auto i = static_cast<std::size_t>(x - lo_);
    return i < values_.size() ? values_[i] : 0.0;
  }

 private:
  std::int64_t lo_ = 0;
  std::vector<double> values_;
};

Eigen::MatrixXcd hermitian_full(const Eigen::MatrixXcd& lower) {
  Eigen::MatrixXcd full = lower.selfadjointView<Eigen::Lower>();
  return full;
}

// Groups entries of a 2-D state by x2 (then x1) and returns the visiting
// order; row_of[i] is the index of entry i's x1 value among sorted x1s.
struct ColumnLayout {
  std::vector<std::int64_t> x1_values;
  std::vector<Eigen::Index> row_of;
  std::vector<std::size_t> order;  // entries sorted by (x2, x1)
};

ColumnLayout column_layout(const SparseState& state) {
  ColumnLayout layout;
  const auto sites = state.sites();
  layout.row_of.resize(sites.size());
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (layout.x1_values.empty() || layout.x1_values.back() != sites[i].x1) {
      layout.x1_values.push_back(sites[i].x1);
    }
    layout.row_of[i] = static_cast<Eigen::Index>(layout.x1_values.size()) - 1;
  }
  layout.order.resize(sites.size());
  std::iota(layout.order.begin(), layout.order.end(), std::size_t{0});
  std::stable_sort(layout.order.begin(), layout.order.end(),
                   [&](std::size_t a, std::size_t b) { return sites[a].x2 < sites[b].x2; });
  return layout;
}

// rho[row, row'] = sum over columns of B B^dagger, where each x2 value
// contributes one column per traced coin index. `row_index(entry, s)` gives
// the row of component s of an entry (or -1 if the component is traced into
// the column index instead). Components are grouped into columns by
// `column_key(s)`; `columns_per_group` columns are opened per x2 value.
template <typename RowFn, typename ColFn>
Eigen::MatrixXcd accumulate_blocks(const SparseState& state, const ColumnLayout& layout,
                                   Eigen::Index rows, int columns_per_group, RowFn row_index,
                                   ColFn column_key) {
  const auto sites = state.sites();
  const auto amps = state.amplitudes();
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(rows, rows);
  Eigen::MatrixXcd block = Eigen::MatrixXcd::Zero(rows, kRankUpdateBlock);
  Eigen::Index used = 0;
  auto flush = [&]() {
    if (used == 0) return;
    rho.selfadjointView<Eigen::Lower>().rankUpdate(block.leftCols(used));
    block.leftCols(used).setZero();
    used = 0;
  };
  std::size_t k = 0;
  while (k < layout.order.size()) {
    const std::int64_t x2 = sites[layout.order[k]].x2;
    std::size_t end = k;
    while (end < layout.order.size() && sites[layout.order[end]].x2 == x2) ++end;
    if (used + columns_per_group > kRankUpdateBlock) flush();
    for (std::size_t j = k; j < end; ++j) {
      const std::size_t e = layout.order[j];
      for (int s = 0; s < 4; ++s) {
        block(row_index(e, s), used + column_key(s)) = amps[e][s];
      }
    }
    used += columns_per_group;
    k = end;
  }
  flush();
  return hermitian_full(rho);
}

void check_reduction_size(std::size_t n) {
  if (n > kMaxDenseReduction) {
    throw DimensionMismatch(fmt::format(
        "position reduction has {} basis states; dense reductions are limited to {}", n,
        kMaxDenseReduction));
  }
}

}  // namespace

bool DensityDiagnostics::valid() const {
  return hermiticity <= kHermiticityTolerance && trace_error <= kTraceTolerance &&
         min_eigenvalue >= kEigenvalueFloor;
}

DensityMatrix::DensityMatrix(Eigen::MatrixXcd rho, std::vector<std::int64_t> labels)
    : rho_(std::move(rho)), labels_(std::move(labels)) {
  if (rho_.rows() != rho_.cols()) throw DimensionMismatch("density matrix must be square");
  if (static_cast<Eigen::Index>(labels_.size()) != rho_.rows()) {
    throw DimensionMismatch("density matrix label count does not match its dimension");
  }
}

Eigen::VectorXd DensityMatrix::eigenvalues() const {
  const Eigen::MatrixXcd h = 0.5 * (rho_ + rho_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues();
}

DensityDiagnostics DensityMatrix::diagnostics() const {
  DensityDiagnostics d;
  if (rho_.size() == 0) {
    d.trace_error = 1.0;
    return d;
  }
  d.hermiticity = (rho_ - rho_.adjoint()).cwiseAbs().maxCoeff();
  d.trace_error = std::abs(rho_.trace() - Complex(1.0, 0.0));
  d.min_eigenvalue = eigenvalues().minCoeff();
  return d;
}

void DensityMatrix::validate() const {
  const DensityDiagnostics d = diagnostics();
  if (d.hermiticity > kHermiticityTolerance) {
    throw InvalidDensity(fmt::format("density matrix not Hermitian (deviation {:.3e})", d.hermiticity));
  }
  if (d.trace_error > kTraceTolerance) {
    throw InvalidDensity(fmt::format("density matrix trace off by {:.3e}", d.trace_error));
  }
  if (d.min_eigenvalue < kEigenvalueFloor) {
    throw InvalidDensity(fmt::format("density matrix has eigenvalue {:.3e}", d.min_eigenvalue));
  }
}

std::pair<LineDistribution, LineDistribution> marginals(const JointDistribution& joint) {
  LineDistribution first;
  for (std::size_t i = 0; i < joint.sites.size(); ++i) {
    const std::int64_t x1 = joint.sites[i].x1;
    if (!first.x.empty() && first.x.back() == x1) {
      first.p.back() += joint.p[i];
    } else {
      first.x.push_back(x1);
      first.p.push_back(joint.p[i]);
    }
  }
  std::vector<std::pair<std::int64_t, double>> second;
  second.reserve(joint.sites.size());
  for (std::size_t i = 0; i < joint.sites.size(); ++i) second.emplace_back(joint.sites[i].x2, joint.p[i]);
  return {std::move(first), accumulate_line(std::move(second))};
}

double mean(const LineDistribution& dist) {
  double m = 0.0;
  for (std::size_t i = 0; i < dist.x.size(); ++i) m += static_cast<double>(dist.x[i]) * dist.p[i];
  return m;
}

double variance(const LineDistribution& dist) {
  const double m = mean(dist);
  double v = 0.0;
  for (std::size_t i = 0; i < dist.x.size(); ++i) {
    const double d = static_cast<double>(dist.x[i]) - m;
    v += d * d * dist.p[i];
  }
  return std::max(v, 0.0);
}

double excess_kurtosis(const LineDistribution& dist) {
  const double m = mean(dist);
  double m2 = 0.0;
  double m4 = 0.0;
  for (std::size_t i = 0; i < dist.x.size(); ++i) {
    const double d2 = std::pow(static_cast<double>(dist.x[i]) - m, 2);
    m2 += d2 * dist.p[i];
    m4 += d2 * d2 * dist.p[i];
  }
  if (m2 <= 0.0) return 0.0;
  return m4 / (m2 * m2) - 3.0;
}

double trace_distance(const JointDistribution& p, const JointDistribution& q) {
  double total = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < p.sites.size() || j < q.sites.size()) {
    if (j >= q.sites.size() || (i < p.sites.size() && p.sites[i] < q.sites[j])) {
      total += std::abs(p.p[i++]);
    } else if (i >= p.sites.size() || q.sites[j] < p.sites[i]) {
      total += std::abs(q.p[j++]);
    } else {
      total += std::abs(p.p[i++] - q.p[j++]);
    }
  }
  return 0.5 * total;
}

double separability_distance(const JointDistribution& joint) {
  const auto [m1, m2] = marginals(joint);
  const DenseLine p1(m1);
  const DenseLine p2(m2);
  // Sum over occupied sites, plus the product mass that falls on sites where
  // the joint distribution vanishes.
  double occupied = 0.0;
  double product_on_occupied = 0.0;
  for (std::size_t i = 0; i < joint.sites.size(); ++i) {
    const double prod = p1(joint.sites[i].x1) * p2(joint.sites[i].x2);
    occupied += std::abs(joint.p[i] - prod);
    product_on_occupied += prod;
  }
  const double mass1 = std::accumulate(m1.p.begin(), m1.p.end(), 0.0);
  const double mass2 = std::accumulate(m2.p.begin(), m2.p.end(), 0.0);
  const double product_elsewhere = std::max(mass1 * mass2 - product_on_occupied, 0.0);
  return 0.5 * (occupied + product_elsewhere);
}

FitResult fit_power_law(std::span<const SeriesPoint> series, FitWindow window) {
  if (window.lo >= window.hi) {
    throw FitError(fmt::format("fit window [{}, {}] is empty", window.lo, window.hi));
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (const auto& pt : series) {
    if (pt.t < window.lo || pt.t > window.hi || pt.t < 1) continue;
    if (!(pt.value > 0.0) || !std::isfinite(pt.value)) continue;
    xs.push_back(std::log(static_cast<double>(pt.t)));
    ys.push_back(std::log(pt.value));
  }
  if (xs.size() < 3) {
    throw FitError(fmt::format("fit window [{}, {}] holds {} usable points, need 3", window.lo,
                               window.hi, xs.size()));
  }
  const double n = static_cast<double>(xs.size());
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ys[i] - my);
  }
  if (sxx <= 0.0) throw FitError("fit window holds a single distinct time");
  FitResult r;
  r.exponent = sxy / sxx;
  r.intercept = my - r.exponent * mx;
  r.window = window;
  r.points = xs.size();
  double ss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - (r.intercept + r.exponent * xs[i]);
    ss += e * e;
  }
  r.residual = std::sqrt(ss / n);
  return r;
}

FitResult fit_dynamical_exponent(std::span<const SeriesPoint> series, FitWindow window) {
  return fit_power_law(series, window);
}

FitResult fit_coherence_decay(std::span<const SeriesPoint> series, FitWindow window) {
  FitResult r = fit_power_law(series, window);
  r.exponent = -r.exponent;
  return r;
}

CoinReductions coin_reductions_from(const Eigen::Matrix4cd& rho_c) {
  Eigen::MatrixXcd r1 = Eigen::MatrixXcd::Zero(2, 2);
  Eigen::MatrixXcd r2 = Eigen::MatrixXcd::Zero(2, 2);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int j = 0; j < 2; ++j) {
        r1(a, b) += rho_c(2 * a + j, 2 * b + j);
        r2(a, b) += rho_c(2 * j + a, 2 * j + b);
      }
  return {DensityMatrix(Eigen::MatrixXcd(rho_c), {0, 1, 2, 3}), DensityMatrix(r1, {0, 1}),
          DensityMatrix(r2, {0, 1})};
}

CoinReductions reduced_coin_density(const SparseState& state) {
  Eigen::Matrix4cd acc = Eigen::Matrix4cd::Zero();
  for (const auto& a : state.amplitudes()) {
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c <= r; ++c) acc(r, c) += a[r] * std::conj(a[c]);
  }
  for (int r = 0; r < 4; ++r)
    for (int c = r + 1; c < 4; ++c) acc(r, c) = std::conj(acc(c, r));
  for (int r = 0; r < 4; ++r) acc(r, r) = acc(r, r).real();
  return coin_reductions_from(acc);
}

DensityMatrix reduced_coin_density(const LineState& state) {
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(2, 2);
  for (const auto& a : state.amplitudes()) {
    acc(0, 0) += std::norm(a[0]);
    acc(1, 1) += std::norm(a[1]);
    acc(1, 0) += a[1] * std::conj(a[0]);
  }
  acc(0, 1) = std::conj(acc(1, 0));
  return DensityMatrix(acc, {0, 1});
}

double entanglement_entropy(const DensityMatrix& rho) {
  rho.validate();
  const Eigen::VectorXd lambda = rho.eigenvalues();
  double s = 0.0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda(i) > kEntropyCutoff) s -= lambda(i) * std::log2(lambda(i));
  }
  return std::max(s, 0.0);
}

double negativity(const DensityMatrix& rho_c) {
  if (rho_c.dimension() != 4) throw DimensionMismatch("negativity expects a 4x4 coin density matrix");
  rho_c.validate();
  const Eigen::MatrixXcd& r = rho_c.matrix();
  Eigen::MatrixXcd pt(4, 4);
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int ap = 0; ap < 2; ++ap)
        for (int bp = 0; bp < 2; ++bp) pt(2 * a + b, 2 * ap + bp) = r(2 * ap + b, 2 * a + bp);
  const Eigen::MatrixXcd h = 0.5 * (pt + pt.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(h, Eigen::EigenvaluesOnly);
  const double trace_norm = solver.eigenvalues().cwiseAbs().sum();
  const double n = 0.5 * (trace_norm - 1.0);
  if (n < 0.0 && n >= -1e-12) return 0.0;
  return n;
}

DensityMatrix reduced_position_density_x1(const SparseState& state) {
  const ColumnLayout layout = column_layout(state);
  const auto n = static_cast<Eigen::Index>(layout.x1_values.size());
  check_reduction_size(layout.x1_values.size());
  Eigen::MatrixXcd rho = accumulate_blocks(
      state, layout, n, 4, [&](std::size_t e, int) { return layout.row_of[e]; },
      [](int s) { return static_cast<Eigen::Index>(s); });
  return DensityMatrix(std::move(rho), layout.x1_values);
}

DensityMatrix reduced_position_coin_density_x1(const SparseState& state) {
  const ColumnLayout layout = column_layout(state);
  const auto n = static_cast<Eigen::Index>(layout.x1_values.size());
  check_reduction_size(2 * layout.x1_values.size());
  // component s = 2 * s1 + s2: s1 joins the row, s2 selects the column.
  Eigen::MatrixXcd rho = accumulate_blocks(
      state, layout, 2 * n, 2, [&](std::size_t e, int s) { return 2 * layout.row_of[e] + s / 2; },
      [](int s) { return static_cast<Eigen::Index>(s % 2); });
  std::vector<std::int64_t> labels;
  labels.reserve(static_cast<std::size_t>(2 * n));
  for (auto x : layout.x1_values) {
    labels.push_back(x);
    labels.push_back(x);
  }
  return DensityMatrix(std::move(rho), std::move(labels));
}

DensityMatrix reduced_position_density(const LineState& state) {
  const auto n = static_cast<Eigen::Index>(state.size());
  check_reduction_size(state.size());
  Eigen::MatrixXcd a(n, 2);
  const auto amps = state.amplitudes();
  for (Eigen::Index i = 0; i < n; ++i) {
    a(i, 0) = amps[static_cast<std::size_t>(i)][0];
    a(i, 1) = amps[static_cast<std::size_t>(i)][1];
  }
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  rho.selfadjointView<Eigen::Lower>().rankUpdate(a);
  const auto pos = state.positions();
  return DensityMatrix(hermitian_full(rho), std::vector<std::int64_t>(pos.begin(), pos.end()));
}

double l1_coherence(const DensityMatrix& rho_x1, std::int64_t t) {
  if (t < 1) throw InvalidParameter("coherence normalization needs t >= 1");
  const Eigen::MatrixXcd& r = rho_x1.matrix();
  double s = 0.0;
  for (Eigen::Index j = 1; j < r.cols(); ++j)
    for (Eigen::Index i = 0; i < j; ++i) s += std::abs(r(i, j));
  return s / static_cast<double>(t);
}

}  // namespace qwalk
