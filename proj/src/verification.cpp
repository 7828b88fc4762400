#include "qwalk/verification.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include <fmt/format.h>

#include "qwalk/errors.hpp"

namespace qwalk {

DenseState::DenseState(std::int64_t bound1, std::int64_t bound2)
    : bound1_(bound1), bound2_(bound2), width1_(2 * bound1 + 1), width2_(2 * bound2 + 1) {
  if (bound1 < 0 || bound2 < 0) throw InvalidParameter("dense lattice bounds must be >= 0");
  amps_.assign(static_cast<std::size_t>(width1_ * width2_ * 4), Complex(0.0, 0.0));
}

std::size_t DenseState::index(std::int64_t x1, std::int64_t x2, int s) const {
  if (std::abs(x1) > bound1_ || std::abs(x2) > bound2_) {
    throw LatticeTooSmall(fmt::format("site ({}, {}) lies outside the dense lattice", x1, x2));
  }
  return static_cast<std::size_t>(((x1 + bound1_) * width2_ + (x2 + bound2_)) * 4 + s);
}

Complex& DenseState::at(std::int64_t x1, std::int64_t x2, int s) { return amps_[index(x1, x2, s)]; }

Complex DenseState::at(std::int64_t x1, std::int64_t x2, int s) const {
  return amps_[index(x1, x2, s)];
}

double DenseState::norm_squared() const {
  double total = 0.0;
  for (const auto& a : amps_) total += std::norm(a);
  return total;
}

void DenseState::apply_coin(const CoinMatrix4& c) {
  for (std::size_t base = 0; base < amps_.size(); base += 4) {
    Complex in[4] = {amps_[base], amps_[base + 1], amps_[base + 2], amps_[base + 3]};
    for (int r = 0; r < 4; ++r) {
      Complex acc(0.0, 0.0);
      for (int k = 0; k < 4; ++k) acc += c(r, k) * in[k];
      amps_[base + r] = acc;
    }
  }
}

void DenseState::apply_shift(std::int64_t d1, std::int64_t d2) {
  if (d1 < 1 || d2 < 1) throw InvalidParameter("step sizes must be >= 1");
  std::vector<Complex> out(amps_.size(), Complex(0.0, 0.0));
  for (std::int64_t x1 = -bound1_; x1 <= bound1_; ++x1) {
    for (std::int64_t x2 = -bound2_; x2 <= bound2_; ++x2) {
      for (int s = 0; s < 4; ++s) {
        const Complex a = amps_[index(x1, x2, s)];
        if (a == Complex(0.0, 0.0)) continue;
        const std::int64_t y1 = x1 + kSign1[s] * d1;
        const std::int64_t y2 = x2 + kSign2[s] * d2;
        if (std::abs(y1) > bound1_ || std::abs(y2) > bound2_) {
          throw LatticeTooSmall(fmt::format(
              "shift ({}, {}) carries amplitude from ({}, {}) off the [-{}, {}] x [-{}, {}] lattice",
              d1, d2, x1, x2, bound1_, bound1_, bound2_, bound2_));
        }
        out[index(y1, y2, s)] += a;
      }
    }
  }
  amps_ = std::move(out);
  ++time_;
}

double max_abs_difference(const DenseState& dense, const SparseState& sparse) {
  double worst = 0.0;
  for (std::int64_t x1 = -dense.bound1(); x1 <= dense.bound1(); ++x1) {
    for (std::int64_t x2 = -dense.bound2(); x2 <= dense.bound2(); ++x2) {
      const Amplitude4 a = sparse.amplitude({x1, x2});
      for (int s = 0; s < 4; ++s) worst = std::max(worst, std::abs(dense.at(x1, x2, s) - a[s]));
    }
  }
  const auto sites = sparse.sites();
  const auto amps = sparse.amplitudes();
  for (std::size_t i = 0; i < sites.size(); ++i) {
    if (std::abs(sites[i].x1) <= dense.bound1() && std::abs(sites[i].x2) <= dense.bound2()) continue;
    for (int s = 0; s < 4; ++s) worst = std::max(worst, std::abs(amps[i][s]));
  }
  return worst;
}

DenseTrajectory dense_evolve(const WalkConfig& config, std::int64_t bound) {
  config.validate();
  if (config.dimension != 2) throw InvalidParameter("the dense reference is two-dimensional");
  DenseTrajectory out;
  out.steps = draw_steps(config);
  const CoinMatrix4 coin = walk_coin(config);
  DenseState state(bound, bound);
  const Amplitude4 c = config.initial_coin4();
  double norm = 0.0;
  for (int s = 0; s < 4; ++s) {
    state.at(0, 0, s) = c[s];
    norm += std::norm(c[s]);
  }
  if (std::abs(std::sqrt(norm) - 1.0) > kInitialNormTolerance) {
    throw InvalidState("initial coin must have unit norm");
  }
  out.states.push_back(state);
  for (std::size_t i = 0; i < out.steps.d1.size(); ++i) {
    state.apply_coin(coin);
    state.apply_shift(out.steps.d1[i], out.steps.d2[i]);
    out.states.push_back(state);
  }
  return out;
}

OracleResult separability_oracle(const WalkConfig& config) {
  config.validate();
  if (config.dimension != 2 || config.coin_kind != CoinKind::separable) {
    throw InvalidParameter("the separability oracle applies to separable 2-D walks only");
  }
  const StepSequence steps = draw_steps(config);
  const CoinMatrix4 coin = walk_coin(config);
  SparseState state = SparseState::init_localized({0, 0}, config.initial_coin4());
  OracleResult r;
  for (std::size_t i = 0; i < steps.d1.size(); ++i) {
    step(state, coin, steps.d1[i], steps.d2[i]);
    r.max_deviation = std::max(r.max_deviation, separability_distance(state.joint_distribution()));
  }
  r.passed = r.max_deviation < kSeparabilityTolerance;
  return r;
}

std::pair<Amplitude2, Amplitude2> split_product_coin(const Amplitude4& c) {
  const double det = std::abs(c[0] * c[3] - c[1] * c[2]);
  if (det > 1e-12) {
    throw InvalidState(fmt::format("initial coin is entangled (|det| = {:.3e}); a product is required", det));
  }
  const double n0 = std::norm(c[0]) + std::norm(c[1]);
  const double n1 = std::norm(c[2]) + std::norm(c[3]);
  const int row = n0 >= n1 ? 0 : 1;
  const double rn = std::sqrt(row == 0 ? n0 : n1);
  if (rn == 0.0) throw InvalidState("initial coin is zero");
  Amplitude2 b = {c[2 * row] / rn, c[2 * row + 1] / rn};
  Amplitude2 a;
  for (int i = 0; i < 2; ++i) a[i] = std::conj(b[0]) * c[2 * i] + std::conj(b[1]) * c[2 * i + 1];
  return {a, b};
}

Eigen::MatrixXcd dense_reduced_x1c1(const DenseState& state) {
  const std::int64_t b1 = state.bound1();
  const std::int64_t b2 = state.bound2();
  const Eigen::Index rows = 2 * (2 * b1 + 1);
  const Eigen::Index cols = 2 * (2 * b2 + 1);
  Eigen::MatrixXcd psi(rows, cols);
  for (std::int64_t x1 = -b1; x1 <= b1; ++x1) {
    for (int s1 = 0; s1 < 2; ++s1) {
      for (std::int64_t x2 = -b2; x2 <= b2; ++x2) {
        for (int s2 = 0; s2 < 2; ++s2) {
          psi(2 * (x1 + b1) + s1, 2 * (x2 + b2) + s2) = state.at(x1, x2, 2 * s1 + s2);
        }
      }
    }
  }
  return psi * psi.adjoint();
}

KrausSet kraus_decompose(const WalkConfig& config, std::int64_t input_bound) {
  if (config.dimension != 2) throw InvalidParameter("the Kraus decomposition needs a 2-D walk");
  if (config.t_max < 0) throw InvalidParameter("t_max must be >= 0");
  if (input_bound < 0) throw InvalidParameter("input bound must be >= 0");
  check_support(config.q_x1);
  check_support(config.q_x2);
  const auto [a, b] = split_product_coin(config.initial_coin4());
  (void)a;

  StepSequence steps;
  if (config.t_max > 0) steps = draw_steps(config);
  std::int64_t reach1 = 0;
  std::int64_t reach2 = 0;
  for (auto d : steps.d1) reach1 += d;
  for (auto d : steps.d2) reach2 += d;

  KrausSet k;
  k.input_bound = input_bound;
  k.output_bound = input_bound + reach1;
  const Eigen::Index in_dim = k.input_dimension();
  const Eigen::Index out_dim = k.output_dimension();
  const std::int64_t x2_count = 2 * reach2 + 1;
  std::vector<Eigen::MatrixXcd> ops(static_cast<std::size_t>(2 * x2_count),
                                    Eigen::MatrixXcd::Zero(out_dim, in_dim));
  const CoinMatrix4 coin = walk_coin(config);

  for (std::int64_t x1 = -input_bound; x1 <= input_bound; ++x1) {
    for (int s1 = 0; s1 < 2; ++s1) {
      DenseState st(k.output_bound, reach2);
      for (int s2 = 0; s2 < 2; ++s2) st.at(x1, 0, 2 * s1 + s2) = b[s2];
      for (std::size_t i = 0; i < steps.d1.size(); ++i) {
        st.apply_coin(coin);
        st.apply_shift(steps.d1[i], steps.d2[i]);
      }
      const Eigen::Index col = 2 * (x1 + input_bound) + s1;
      for (std::int64_t x2 = -reach2; x2 <= reach2; ++x2) {
        for (int s2 = 0; s2 < 2; ++s2) {
          Eigen::MatrixXcd& e = ops[static_cast<std::size_t>(2 * (x2 + reach2) + s2)];
          for (std::int64_t y1 = -k.output_bound; y1 <= k.output_bound; ++y1) {
            for (int r1 = 0; r1 < 2; ++r1) {
              e(2 * (y1 + k.output_bound) + r1, col) = st.at(y1, x2, 2 * r1 + s2);
            }
          }
        }
      }
    }
  }

  Eigen::MatrixXcd sum = Eigen::MatrixXcd::Zero(in_dim, in_dim);
  for (const auto& e : ops) sum.noalias() += e.adjoint() * e;
  k.completeness_defect = (sum - Eigen::MatrixXcd::Identity(in_dim, in_dim)).cwiseAbs().maxCoeff();
  if (k.completeness_defect > kKrausCompletenessTolerance) {
    throw InvalidDensity(fmt::format("Kraus completeness violated by {:.3e}", k.completeness_defect));
  }
  for (std::int64_t x2 = -reach2; x2 <= reach2; ++x2) {
    for (int s2 = 0; s2 < 2; ++s2) {
      auto& e = ops[static_cast<std::size_t>(2 * (x2 + reach2) + s2)];
      if (e.norm() < kKrausDropNorm) continue;
      k.operators.push_back(std::move(e));
      k.labels.emplace_back(x2, s2);
    }
  }
  return k;
}

DensityMatrix channel_apply(const KrausSet& kraus, const DensityMatrix& rho0) {
  if (rho0.dimension() != kraus.input_dimension()) {
    throw DimensionMismatch(fmt::format("channel expects input dimension {}, got {}",
                                        kraus.input_dimension(), rho0.dimension()));
  }
  rho0.validate();
  const Eigen::Index n = kraus.output_dimension();
  Eigen::MatrixXcd out = Eigen::MatrixXcd::Zero(n, n);
  for (const auto& e : kraus.operators) out.noalias() += e * rho0.matrix() * e.adjoint();
  std::vector<std::int64_t> labels(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) labels[static_cast<std::size_t>(i)] = i / 2 - kraus.output_bound;
  return DensityMatrix(std::move(out), std::move(labels));
}

bool VerificationReport::all_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

WalkConfig make_config(CoinKind kind, QParam q1, QParam q2, std::int64_t t_max, std::uint64_t seed) {
  WalkConfig c;
  c.coin_kind = kind;
  c.q_x1 = q1;
  c.q_x2 = q2;
  c.t_max = t_max;
  c.seed = seed;
  return c;
}

CheckResult below(std::string name, double value, double tolerance, std::string detail = {}) {
  return {std::move(name), value < tolerance, value, tolerance, std::move(detail)};
}

Eigen::Matrix4cd random_unitary(RandomStream& rng) {
  Eigen::Matrix4cd m;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) m(r, c) = Complex(2.0 * rng.uniform() - 1.0, 2.0 * rng.uniform() - 1.0);
  Eigen::HouseholderQR<Eigen::Matrix4cd> qr(m);
  return qr.householderQ() * Eigen::Matrix4cd::Identity();
}

const QParam kHalf = QParam::finite(0.5);
const QParam kOne = QParam::finite(1.0);
const QParam kInf = QParam::infinity();

CheckResult check_coins(RandomStream& rng) {
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const CoinParams p{rng.uniform() * 7.0 - 0.5, rng.uniform() * 7.0, rng.uniform() * 7.0};
    const CoinParams q{rng.uniform() * 7.0, rng.uniform() * 7.0, rng.uniform() * 7.0 - 0.5};
    const CoinMatrix2 a = build_c2(p);
    const CoinMatrix2 b = build_c2(q);
    worst = std::max({worst, unitarity_defect(a.matrix()), unitarity_defect(b.matrix()),
                      unitarity_defect(separable_coin(a, b).matrix()),
                      unitarity_defect(entangling_coin(a, b).matrix())});
  }
  return below("coin unitarity", worst, kUnitarityTolerance);
}

CheckResult check_norm_drift(RandomStream& rng) {
  SparseState state = SparseState::init_localized({0, 0}, {0.5, 0.5, 0.5, 0.5});
  for (int t = 0; t < 500; ++t) {
    const CoinMatrix4 c = CoinMatrix4::from_matrix(random_unitary(rng));
    const std::int64_t d1 = rng.uniform() < 0.2 ? 2 : 1;
    const std::int64_t d2 = rng.uniform() < 0.2 ? 2 : 1;
    step(state, c, d1, d2);
  }
  return below("norm drift over 500 random steps", std::abs(state.norm_squared() - 1.0), 1e-10);
}

CheckResult check_dense_sparse(const VerificationOptions& options) {
  struct Class {
    CoinKind kind;
    QParam q1, q2;
  };
  const Class classes[] = {{CoinKind::separable, kHalf, kHalf},
                           {CoinKind::entangling, kHalf, kHalf},
                           {CoinKind::entangling, kInf, kInf},
                           {CoinKind::separable, kOne, kInf},
                           {CoinKind::entangling, kHalf, kInf}};
  double worst = 0.0;
  std::size_t comparisons = 0;
  for (std::size_t ci = 0; ci < std::size(classes); ++ci) {
    for (std::size_t k = 0; k < options.seeds_per_class; ++k) {
      const auto& cl = classes[ci];
      const WalkConfig c = make_config(cl.kind, cl.q1, cl.q2, 6,
                                       derive_seed(options.seed, 1000 * (ci + 1) + k));
      const DenseTrajectory dense = dense_evolve(c, 22);
      const CoinMatrix4 coin = walk_coin(c);
      SparseState s = SparseState::init_localized({0, 0}, c.initial_coin4());
      worst = std::max(worst, max_abs_difference(dense.states[0], s));
      for (std::size_t i = 0; i < dense.steps.d1.size(); ++i) {
        step(s, coin, dense.steps.d1[i], dense.steps.d2[i]);
        worst = std::max(worst, max_abs_difference(dense.states[i + 1], s));
        ++comparisons;
      }
    }
  }
  return below("dense/sparse agreement, t <= 6", worst, 1e-12,
               fmt::format("{} state comparisons over {} configuration classes", comparisons,
                           std::size(classes)));
}

CheckResult check_separability(const VerificationOptions& options) {
  const WalkConfig configs[] = {
      make_config(CoinKind::separable, kHalf, kHalf, 50, options.seed),
      make_config(CoinKind::separable, kOne, kInf, 50, options.seed),
      make_config(CoinKind::separable, kInf, kHalf, 50, options.seed),
      make_config(CoinKind::separable, kInf, kInf, 20, options.seed),
  };
  double worst = 0.0;
  for (const auto& c : configs) worst = std::max(worst, separability_oracle(c).max_deviation);
  return below("separable walks have product distributions", worst, kSeparabilityTolerance);
}

CheckResult check_factorized(const VerificationOptions& options) {
  double worst = 0.0;
  double worst_projector = 0.0;
  const WalkConfig configs[] = {
      make_config(CoinKind::separable, kOne, kInf, 50, options.seed),
      make_config(CoinKind::separable, kInf, kHalf, 30, options.seed + 1),
  };
  for (WalkConfig c : configs) {
    c.coin_x1 = {0.3, 0.4, 1.1};
    c.initial_coin = {Complex(0.6, 0.0), Complex(0.0, 0.0), Complex(0.0, 0.8), Complex(0.0, 0.0)};
    const StepSequence steps = draw_steps(c);
    const CoinMatrix4 coin = walk_coin(c);
    const auto [a, b] = split_product_coin(c.initial_coin4());
    SparseState s = SparseState::init_localized({0, 0}, c.initial_coin4());
    LineState line = LineState::init_localized(0, a);
    const CoinMatrix2 c1 = build_c2(c.coin_x1);
    for (std::size_t i = 0; i < steps.d1.size(); ++i) {
      step(s, coin, steps.d1[i], steps.d2[i]);
      step(line, c1, steps.d1[i]);
      const auto [m1, m2] = marginals(s.joint_distribution());
      const LineDistribution ld = line.distribution();
      for (std::size_t j = 0; j < m1.x.size(); ++j) {
        worst = std::max(worst, std::abs(m1.p[j] - ld.probability(m1.x[j])));
      }
      for (std::size_t j = 0; j < ld.x.size(); ++j) {
        worst = std::max(worst, std::abs(ld.p[j] - m1.probability(ld.x[j])));
      }
      const DensityMatrix rho = reduced_position_coin_density_x1(s);
      const auto& labels = rho.labels();
      for (Eigen::Index r = 0; r < rho.dimension(); ++r) {
        const Amplitude2 ar = line.amplitude(labels[static_cast<std::size_t>(r)]);
        for (Eigen::Index q = 0; q < rho.dimension(); ++q) {
          const Amplitude2 aq = line.amplitude(labels[static_cast<std::size_t>(q)]);
          const Complex expected = ar[r % 2] * std::conj(aq[q % 2]);
          worst_projector = std::max(worst_projector, std::abs(rho.matrix()(r, q) - expected));
        }
      }
    }
  }
  CheckResult r = below("separable marginal equals the 1-D walk", worst, 1e-12);
  r.detail = fmt::format("x1 (x) c1 density vs 1-D projector deviation {:.3e}", worst_projector);
  r.passed = r.passed && worst_projector < 1e-10;
  return r;
}

struct KrausChecks {
  double completeness = 0.0;
  double equivalence = 0.0;
  double scaled_isometry = 0.0;
  double separable_vs_line = 0.0;
  double entangling_entropy = std::numeric_limits<double>::infinity();
  std::size_t decompositions = 0;
};

KrausChecks kraus_checks(const VerificationOptions& options) {
  KrausChecks out;
  const std::pair<QParam, QParam> qs[] = {{kHalf, kHalf}, {kHalf, kInf}, {kInf, kInf}, {kOne, kOne}};
  for (CoinKind kind : {CoinKind::separable, CoinKind::entangling}) {
    for (const auto& [q1, q2] : qs) {
      for (std::int64_t t = 0; t <= 4; ++t) {
        WalkConfig c = make_config(kind, q1, q2, t, options.seed + static_cast<std::uint64_t>(t));
        const std::int64_t bound = 1;
        const KrausSet k = kraus_decompose(c, bound);
        ++out.decompositions;
        out.completeness = std::max(out.completeness, k.completeness_defect);

        // Pure x1 (x) c1 input: localized at x1 = 0 with the first subcoin factor.
        const auto [a, b] = split_product_coin(c.initial_coin4());
        Eigen::VectorXcd phi = Eigen::VectorXcd::Zero(k.input_dimension());
        phi(2 * bound) = a[0];
        phi(2 * bound + 1) = a[1];
        std::vector<std::int64_t> in_labels(static_cast<std::size_t>(k.input_dimension()));
        for (std::size_t i = 0; i < in_labels.size(); ++i) in_labels[i] = static_cast<std::int64_t>(i / 2) - bound;
        const DensityMatrix rho0(phi * phi.adjoint(), in_labels);
        const DensityMatrix out_rho = channel_apply(k, rho0);

        std::int64_t reach2 = 0;
        StepSequence steps;
        if (t > 0) steps = draw_steps(c);
        for (auto d : steps.d2) reach2 += d;
        DenseState full(k.output_bound, reach2);
        const Amplitude4 init = c.initial_coin4();
        for (int s = 0; s < 4; ++s) full.at(0, 0, s) = init[s];
        const CoinMatrix4 coin = walk_coin(c);
        for (std::size_t i = 0; i < steps.d1.size(); ++i) {
          full.apply_coin(coin);
          full.apply_shift(steps.d1[i], steps.d2[i]);
        }
        const Eigen::MatrixXcd direct = dense_reduced_x1c1(full);
        out.equivalence = std::max(out.equivalence, (direct - out_rho.matrix()).cwiseAbs().maxCoeff());

        if (kind == CoinKind::separable) {
          const Eigen::Index n = k.input_dimension();
          for (const auto& e : k.operators) {
            const Eigen::MatrixXcd g = e.adjoint() * e;
            const Complex scale = g.trace() / static_cast<double>(n);
            out.scaled_isometry = std::max(
                out.scaled_isometry,
                (g - scale * Eigen::MatrixXcd::Identity(n, n)).cwiseAbs().maxCoeff());
          }
          LineState line = LineState::init_localized(0, a);
          const CoinMatrix2 c1 = build_c2(c.coin_x1);
          for (auto d : steps.d1) step(line, c1, d);
          Eigen::VectorXcd v = Eigen::VectorXcd::Zero(k.output_dimension());
          const auto xs = line.positions();
          const auto amps = line.amplitudes();
          for (std::size_t i = 0; i < xs.size(); ++i) {
            v(2 * (xs[i] + k.output_bound)) = amps[i][0];
            v(2 * (xs[i] + k.output_bound) + 1) = amps[i][1];
          }
          const Eigen::MatrixXcd expected = v * v.adjoint();
          out.separable_vs_line =
              std::max(out.separable_vs_line, (expected - out_rho.matrix()).cwiseAbs().maxCoeff());
        } else if (t == 3 && q2.is_infinite()) {
          out.entangling_entropy = std::min(out.entangling_entropy, entanglement_entropy(out_rho));
        }
      }
    }
  }
  return out;
}

struct ValidityTotals {
  double worst_hermiticity = 0.0;
  double worst_trace = 0.0;
  double worst_eigenvalue = 0.0;
  double worst_subadditivity = -1.0;
  bool bounds_ok = true;
  std::size_t matrices = 0;
};

void accumulate(ValidityTotals& v, const DensityMatrix& rho) {
  const DensityDiagnostics d = rho.diagnostics();
  v.worst_hermiticity = std::max(v.worst_hermiticity, d.hermiticity);
  v.worst_trace = std::max(v.worst_trace, d.trace_error);
  v.worst_eigenvalue = std::min(v.worst_eigenvalue, d.min_eigenvalue);
  ++v.matrices;
}

CheckResult check_density_validity(const VerificationOptions& options) {
  ValidityTotals v;
  const WalkConfig configs[] = {
      make_config(CoinKind::entangling, kHalf, kHalf, 60, options.seed),
      make_config(CoinKind::entangling, kHalf, kInf, 60, options.seed),
      make_config(CoinKind::entangling, kHalf, kOne, 60, options.seed),
      make_config(CoinKind::separable, kOne, kInf, 40, options.seed),
  };
  for (const auto& c : configs) {
    const StepSequence steps = draw_steps(c);
    const CoinMatrix4 coin = walk_coin(c);
    SparseState s = SparseState::init_localized({0, 0}, c.initial_coin4());
    for (std::size_t i = 0; i < steps.d1.size(); ++i) {
      step(s, coin, steps.d1[i], steps.d2[i]);
      const CoinReductions red = reduced_coin_density(s);
      accumulate(v, red.coin);
      accumulate(v, red.subcoin1);
      accumulate(v, red.subcoin2);
      accumulate(v, reduced_position_density_x1(s));
      const double sc = entanglement_entropy(red.coin);
      const double s1 = entanglement_entropy(red.subcoin1);
      const double s2 = entanglement_entropy(red.subcoin2);
      v.worst_subadditivity = std::max(v.worst_subadditivity, sc - s1 - s2);
      v.bounds_ok = v.bounds_ok && sc >= 0.0 && sc <= 2.0 + 1e-12 && s1 >= 0.0 && s1 <= 1.0 + 1e-12 &&
                    s2 >= 0.0 && s2 <= 1.0 + 1e-12;
    }
  }
  CheckResult r;
  r.name = "density matrices valid at every step";
  r.value = std::max({v.worst_hermiticity / kHermiticityTolerance, v.worst_trace / kTraceTolerance,
                      v.worst_eigenvalue / kEigenvalueFloor});
  r.tolerance = 1.0;
  r.passed = v.worst_hermiticity <= kHermiticityTolerance && v.worst_trace <= kTraceTolerance &&
             v.worst_eigenvalue >= kEigenvalueFloor && v.worst_subadditivity <= 1e-9 && v.bounds_ok;
  r.detail = fmt::format(
      "{} matrices; hermiticity {:.2e}, trace {:.2e}, min eigenvalue {:.2e}, "
      "S_c - S_c1 - S_c2 <= {:.3f}, entropy bounds {}",
      v.matrices, v.worst_hermiticity, v.worst_trace, v.worst_eigenvalue, v.worst_subadditivity,
      v.bounds_ok ? "hold" : "violated");
  return r;
}

CheckResult check_trace_distance_growth() {
  const WalkConfig c = make_config(CoinKind::entangling, kHalf, kHalf, 100, 0);
  const CoinMatrix4 coin = walk_coin(c);
  SparseState s = SparseState::init_localized({0, 0}, c.initial_coin4());
  std::vector<double> ts, ds;
  double at50 = 0.0;
  for (std::int64_t t = 1; t <= 100; ++t) {
    step(s, coin, 1, 1);
    const double d = separability_distance(s.joint_distribution());
    if (t == 50) at50 = d;
    if (t >= 10) {
      ts.push_back(static_cast<double>(t));
      ds.push_back(d);
    }
  }
  double mt = 0.0, md = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    mt += ts[i];
    md += ds[i];
  }
  mt /= static_cast<double>(ts.size());
  md /= static_cast<double>(ts.size());
  double sxy = 0.0, sxx = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    sxy += (ts[i] - mt) * (ds[i] - md);
    sxx += (ts[i] - mt) * (ts[i] - mt);
  }
  const double slope = sxy / sxx;
  CheckResult r;
  r.name = "entangling walk trace distance grows";
  r.value = at50;
  r.tolerance = 0.01;
  r.passed = at50 > 0.01 && slope > 0.0;
  r.detail = fmt::format("D(50) = {:.4f}, slope over [10, 100] = {:.3e}", at50, slope);
  return r;
}

}  // namespace

VerificationReport run_verification_suite(const VerificationOptions& options) {
  VerificationReport report;
  RandomStream rng(derive_seed(options.seed, 0x7665726966790001ULL));
  report.checks.push_back(check_coins(rng));
  report.checks.push_back(check_norm_drift(rng));
  report.checks.push_back(check_dense_sparse(options));
  report.checks.push_back(check_separability(options));
  report.checks.push_back(check_factorized(options));

  const KrausChecks k = kraus_checks(options);
  const std::string n = fmt::format("{} decompositions, t <= 4", k.decompositions);
  report.checks.push_back(below("Kraus completeness", k.completeness, kKrausCompletenessTolerance, n));
  report.checks.push_back(below("channel output equals partial trace", k.equivalence, 1e-10, n));
  report.checks.push_back(below("separable Kraus operators are scaled isometries", k.scaled_isometry, 1e-10));
  report.checks.push_back(below("separable channel equals the 1-D evolution", k.separable_vs_line, 1e-10));
  report.checks.push_back({"entangling channel is not unitary", k.entangling_entropy > 1e-6,
                           k.entangling_entropy, 1e-6,
                           "minimum output entropy from a pure input, t = 3, q_x2 = inf"});

  report.checks.push_back(check_density_validity(options));
  report.checks.push_back(check_trace_distance_growth());
  return report;
}

}  // namespace qwalk
