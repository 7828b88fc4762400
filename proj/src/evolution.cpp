#include "qwalk/evolution.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <thread>

#include <fmt/format.h>

#include "qwalk/errors.hpp"
#include "qwalk/spectral.hpp"

namespace qwalk {

namespace {

// Separate stream index for the momentum jitter so it never overlaps the
// step stream of the same seed.
constexpr std::uint64_t kJitterStream = 0x6a69747465720001ULL;

bool due(std::int64_t t, std::int64_t stride, std::int64_t t_max) {
  return t == t_max || t % stride == 0;
}

void check_stride(std::int64_t stride, const char* name) {
  if (stride < 1) throw InvalidParameter(fmt::format("{} must be >= 1, got {}", name, stride));
}

void measure_coin(ObservableRecord& rec, const CoinReductions& red, bool entropies, bool neg) {
  if (entropies) {
    rec.entropy_c = entanglement_entropy(red.coin);
    rec.entropy_c1 = entanglement_entropy(red.subcoin1);
    rec.entropy_c2 = entanglement_entropy(red.subcoin2);
  }
  if (neg) rec.negativity = negativity(red.coin);
}

ObservableRecord measure(const SparseState& state, const ObservableToggles& obs, std::int64_t t,
                         std::int64_t t_max) {
  ObservableRecord rec;
  rec.t = t;
  if (obs.variances || obs.trace_distance) {
    const JointDistribution joint = state.joint_distribution();
    if (obs.variances) {
      const auto [m1, m2] = marginals(joint);
      rec.var_x1 = variance(m1);
      rec.var_x2 = variance(m2);
      rec.var_r = *rec.var_x1 + *rec.var_x2;
    }
    if (obs.trace_distance) rec.trace_distance = separability_distance(joint);
  }
  const bool coin_due = due(t, obs.entropy_stride, t_max) && (obs.entropies || obs.negativity);
  if (coin_due) measure_coin(rec, reduced_coin_density(state), obs.entropies, obs.negativity);
  if (obs.coherence && due(t, obs.coherence_stride, t_max)) {
    const DensityMatrix rho = reduced_position_density_x1(state);
    rho.validate();
    rec.coherence_x1 = l1_coherence(rho, t);
  }
  return rec;
}

ObservableRecord measure(const LineState& state, const ObservableToggles& obs, std::int64_t t,
                         std::int64_t t_max) {
  ObservableRecord rec;
  rec.t = t;
  if (obs.variances) rec.var_x1 = variance(state.distribution());
  if (obs.entropies && due(t, obs.entropy_stride, t_max)) {
    rec.entropy_c = entanglement_entropy(reduced_coin_density(state));
  }
  if (obs.coherence && due(t, obs.coherence_stride, t_max)) {
    const DensityMatrix rho = reduced_position_density(state);
    rho.validate();
    rec.coherence_x1 = l1_coherence(rho, t);
  }
  return rec;
}

Trajectory run_sparse(const WalkConfig& config, const StepSequence& steps, const RunOptions& options) {
  Trajectory out;
  out.steps = steps;
  out.engine = Engine::sparse;
  const auto& obs = config.observables;
  const CoinMatrix4 coin = walk_coin(config);
  SparseState state = SparseState::init_localized({0, 0}, config.initial_coin4());
  for (std::int64_t t = 1; t <= config.t_max; ++t) {
    const auto i = static_cast<std::size_t>(t - 1);
    step(state, coin, steps.d1[i], steps.d2[i]);
    if (options.on_state) options.on_state(state);
    if (due(t, obs.record_stride, config.t_max)) out.records.push_back(measure(state, obs, t, config.t_max));
  }
  return out;
}

Trajectory run_line(const WalkConfig& config, const StepSequence& steps, const RunOptions& options) {
  Trajectory out;
  out.steps = steps;
  out.engine = Engine::sparse;
  const auto& obs = config.observables;
  const CoinMatrix2 coin = walk_coin_1d(config);
  LineState state = LineState::init_localized(0, config.initial_coin2());
  for (std::int64_t t = 1; t <= config.t_max; ++t) {
    step(state, coin, steps.d1[static_cast<std::size_t>(t - 1)]);
    if (options.on_line) options.on_line(state);
    if (due(t, obs.record_stride, config.t_max)) out.records.push_back(measure(state, obs, t, config.t_max));
  }
  return out;
}

Trajectory run_spectral(const WalkConfig& config, const StepSequence& steps, const RunOptions& options) {
  Trajectory out;
  out.steps = steps;
  out.engine = Engine::spectral;
  const auto& obs = config.observables;
  const SpectralMoments m =
      spectral_moments(walk_coin(config), config.initial_coin4(), steps.d1, steps.d2,
                       options.spectral_samples, derive_seed(config.seed, kJitterStream));
  out.spectral_samples = m.samples;
  for (std::int64_t t = 1; t <= config.t_max; ++t) {
    if (!due(t, obs.record_stride, config.t_max)) continue;
    ObservableRecord rec;
    rec.t = t;
    if (obs.variances) {
      rec.var_x1 = m.variance_x1(t);
      rec.var_x2 = m.variance_x2(t);
      rec.var_r = *rec.var_x1 + *rec.var_x2;
    }
    if (due(t, obs.entropy_stride, config.t_max) && (obs.entropies || obs.negativity)) {
      measure_coin(rec, coin_reductions_from(m.coin_density[static_cast<std::size_t>(t - 1)]),
                   obs.entropies, obs.negativity);
    }
    out.records.push_back(rec);
  }
  return out;
}

double sum_steps(const std::vector<std::int64_t>& d) {
  double s = 0.0;
  for (auto v : d) s += static_cast<double>(v);
  return s;
}

ExponentSummary summarize(std::vector<double> values) {
  ExponentSummary s;
  s.values = std::move(values);
  const auto n = static_cast<double>(s.values.size());
  if (s.values.empty()) return s;
  double total = 0.0;
  for (double v : s.values) total += v;
  s.mean = total / n;
  if (s.values.size() > 1) {
    double ss = 0.0;
    for (double v : s.values) ss += (v - s.mean) * (v - s.mean);
    s.stddev = std::sqrt(ss / (n - 1.0));
  }
  return s;
}

std::vector<SeriesPoint> series_of(const std::vector<ObservableRecord>& records,
                                   std::optional<double> ObservableRecord::*field) {
  std::vector<SeriesPoint> out;
  for (const auto& r : records) {
    if (r.*field) out.push_back({r.t, *(r.*field)});
  }
  return out;
}

std::optional<FitResult> try_fit(const std::vector<SeriesPoint>& series, FitWindow window,
                                 FitResult (*fit)(std::span<const SeriesPoint>, FitWindow)) {
  if (series.empty()) return std::nullopt;
  try {
    return fit(series, window);
  } catch (const FitError&) {
    return std::nullopt;  // window not covered by the run
  }
}

constexpr std::optional<double> ObservableRecord::*kAveragedFields[] = {
    &ObservableRecord::var_x1,     &ObservableRecord::var_x2,     &ObservableRecord::var_r,
    &ObservableRecord::trace_distance, &ObservableRecord::entropy_c, &ObservableRecord::entropy_c1,
    &ObservableRecord::entropy_c2, &ObservableRecord::negativity, &ObservableRecord::coherence_x1,
};

std::vector<ObservableRecord> average_records(const std::vector<RealizationResult>& runs) {
  std::vector<ObservableRecord> out;
  if (runs.empty()) return out;
  out = runs.front().records;
  for (auto& rec : out) {
    for (auto field : kAveragedFields) {
      bool everywhere = true;
      double total = 0.0;
      for (const auto& r : runs) {
        auto it = std::lower_bound(r.records.begin(), r.records.end(), rec.t,
                                   [](const ObservableRecord& a, std::int64_t t) { return a.t < t; });
        if (it == r.records.end() || it->t != rec.t || !((*it).*field)) {
          everywhere = false;
          break;
        }
        total += *((*it).*field);
      }
      rec.*field = everywhere ? std::optional<double>(total / static_cast<double>(runs.size()))
                              : std::nullopt;
    }
  }
  return out;
}

}  // namespace

std::string to_string(CoinKind kind) {
  return kind == CoinKind::separable ? "separable" : "entangling";
}

CoinKind parse_coin_kind(std::string_view text) {
  if (text == "separable") return CoinKind::separable;
  if (text == "entangling") return CoinKind::entangling;
  throw InvalidParameter(fmt::format("coin must be 'separable' or 'entangling', got '{}'", text));
}

std::string to_string(Engine engine) {
  switch (engine) {
    case Engine::automatic: return "auto";
    case Engine::sparse: return "sparse";
    case Engine::spectral: return "spectral";
  }
  return "auto";
}

Engine parse_engine(std::string_view text) {
  if (text == "auto") return Engine::automatic;
  if (text == "sparse") return Engine::sparse;
  if (text == "spectral") return Engine::spectral;
  throw InvalidParameter(fmt::format("engine must be 'auto', 'sparse' or 'spectral', got '{}'", text));
}

void WalkConfig::validate() const {
  if (dimension != 1 && dimension != 2) {
    throw InvalidParameter(fmt::format("dimension must be 1 or 2, got {}", dimension));
  }
  if (dimension == 1 && coin_kind == CoinKind::entangling) {
    throw InvalidParameter("the entangling coin requires dimension = 2");
  }
  if (t_max < 1) throw InvalidParameter(fmt::format("t_max must be >= 1, got {}", t_max));
  check_support(q_x1);
  if (dimension == 2) check_support(q_x2);
  (void)build_c2(coin_x1);
  if (dimension == 2) (void)build_c2(coin_x2);
  const std::size_t expected = dimension == 2 ? 4 : 2;
  if (!initial_coin.empty() && initial_coin.size() != expected) {
    throw InvalidState(fmt::format("initial coin needs {} amplitudes, got {}", expected,
                                   initial_coin.size()));
  }
  check_stride(observables.record_stride, "record_stride");
  check_stride(observables.entropy_stride, "entropy_stride");
  check_stride(observables.coherence_stride, "coherence_stride");
}

Amplitude4 WalkConfig::initial_coin4() const {
  if (initial_coin.empty()) return {0.5, 0.5, 0.5, 0.5};
  if (initial_coin.size() != 4) throw InvalidState("2-D walks need a four-component initial coin");
  return {initial_coin[0], initial_coin[1], initial_coin[2], initial_coin[3]};
}

Amplitude2 WalkConfig::initial_coin2() const {
  if (initial_coin.empty()) return {std::numbers::sqrt2 / 2, std::numbers::sqrt2 / 2};
  if (initial_coin.size() != 2) throw InvalidState("1-D walks need a two-component initial coin");
  return {initial_coin[0], initial_coin[1]};
}

StepSequence draw_steps(const WalkConfig& config) {
  StepSequence s;
  RandomStream rng(config.seed);
  const auto n = static_cast<std::size_t>(config.t_max);
  s.d1.reserve(n);
  if (config.dimension == 2) s.d2.reserve(n);
  for (std::int64_t t = 1; t <= config.t_max; ++t) {
    s.d1.push_back(sample({config.q_x1, t}, rng));
    if (config.dimension == 2) s.d2.push_back(sample({config.q_x2, t}, rng));
  }
  return s;
}

CoinMatrix4 walk_coin(const WalkConfig& config) {
  const CoinMatrix2 a = build_c2(config.coin_x1);
  const CoinMatrix2 b = build_c2(config.coin_x2);
  return config.coin_kind == CoinKind::separable ? separable_coin(a, b) : entangling_coin(a, b);
}

CoinMatrix2 walk_coin_1d(const WalkConfig& config) { return build_c2(config.coin_x1); }

void step(SparseState& state, const CoinMatrix4& coin, std::int64_t d1, std::int64_t d2) {
  state.apply_coin(coin);
  state.apply_shift(d1, d2);
}

void step(LineState& state, const CoinMatrix2& coin, std::int64_t d) {
  state.apply_coin(coin);
  state.apply_shift(d);
}

Engine resolve_engine(const WalkConfig& config, const StepSequence& steps,
                      const RunOptions& options) {
  if (config.dimension == 1) return Engine::sparse;
  if (options.engine != Engine::automatic) return options.engine;
  const double box = (sum_steps(steps.d1) + 1.0) * (sum_steps(steps.d2) + 1.0);
  return box > options.site_budget ? Engine::spectral : Engine::sparse;
}

Trajectory run(const WalkConfig& config, const RunOptions& options) {
  config.validate();
  return run_with_steps(config, draw_steps(config), options);
}

Trajectory run_with_steps(const WalkConfig& config, const StepSequence& steps,
                          const RunOptions& options) {
  config.validate();
  const auto n = static_cast<std::size_t>(config.t_max);
  if (steps.d1.size() != n || (config.dimension == 2 && steps.d2.size() != n)) {
    throw DimensionMismatch("step sequence length does not match t_max");
  }
  if (config.dimension == 1) return run_line(config, steps, options);
  switch (resolve_engine(config, steps, options)) {
    case Engine::spectral: return run_spectral(config, steps, options);
    default: return run_sparse(config, steps, options);
  }
}

std::uint64_t realization_seed(std::uint64_t seed, std::size_t k) { return derive_seed(seed, k); }

FitWindow full_window(std::int64_t t_max, const EnsembleOptions& options) {
  return {options.fit_full_start, t_max};
}

FitWindow asymptotic_window(std::int64_t t_max, const EnsembleOptions& options) {
  const std::int64_t lo = options.fit_asymptotic_start > 0 ? options.fit_asymptotic_start
                                                           : (t_max + 1) / 2;
  return {lo, t_max};
}

EnsembleStats ensemble(const WalkConfig& config, const EnsembleOptions& options) {
  config.validate();
  if (options.realizations < 1) throw InvalidParameter("realizations must be >= 1");
  EnsembleStats stats;
  stats.realizations = options.realizations;
  stats.full_window = full_window(config.t_max, options);
  stats.asymptotic_window = asymptotic_window(config.t_max, options);
  stats.coherence_window = {options.coherence_fit_start > 0 ? options.coherence_fit_start
                                                            : stats.asymptotic_window.lo,
                            config.t_max};
  stats.runs.resize(options.realizations);

  auto one = [&](std::size_t k) {
    WalkConfig c = config;
    c.seed = realization_seed(config.seed, k);
    Trajectory tr = run(c, options.run);
    RealizationResult& r = stats.runs[k];
    r.index = k;
    r.seed = c.seed;
    r.engine = tr.engine;
    const auto v1 = series_of(tr.records, &ObservableRecord::var_x1);
    const auto v2 = series_of(tr.records, &ObservableRecord::var_x2);
    r.x1_full = try_fit(v1, stats.full_window, fit_dynamical_exponent);
    r.x1_asymptotic = try_fit(v1, stats.asymptotic_window, fit_dynamical_exponent);
    r.x2_full = try_fit(v2, stats.full_window, fit_dynamical_exponent);
    r.x2_asymptotic = try_fit(v2, stats.asymptotic_window, fit_dynamical_exponent);
    const auto coh = series_of(tr.records, &ObservableRecord::coherence_x1);
    r.coherence = try_fit(coh, stats.coherence_window, fit_coherence_decay);
    for (const auto& rec : tr.records) {
      if (rec.negativity) r.max_negativity = std::max(r.max_negativity, *rec.negativity);
    }
    r.records = std::move(tr.records);
  };

  const unsigned workers =
      std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(options.realizations)));
  if (workers == 1) {
    for (std::size_t k = 0; k < options.realizations; ++k) one(k);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t k; (k = next.fetch_add(1)) < options.realizations;) {
          try {
            one(k);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (failure) std::rethrow_exception(failure);
  }

  auto collect = [&](std::optional<FitResult> RealizationResult::*field)
      -> std::optional<ExponentSummary> {
    std::vector<double> values;
    for (const auto& r : stats.runs) {
      if (!(r.*field)) return std::nullopt;
      values.push_back((r.*field)->exponent);
    }
    return summarize(std::move(values));
  };
  stats.x1_full = collect(&RealizationResult::x1_full);
  stats.x1_asymptotic = collect(&RealizationResult::x1_asymptotic);
  stats.x2_full = collect(&RealizationResult::x2_full);
  stats.x2_asymptotic = collect(&RealizationResult::x2_asymptotic);
  for (const auto& r : stats.runs) stats.max_negativity = std::max(stats.max_negativity, r.max_negativity);
  stats.mean_records = average_records(stats.runs);
  stats.coherence_decay = try_fit(series_of(stats.mean_records, &ObservableRecord::coherence_x1),
                                  stats.coherence_window, fit_coherence_decay);
  return stats;
}

std::vector<SweepPoint> sweep_q(const WalkConfig& config, const std::vector<QParam>& q_x2_list,
                                const EnsembleOptions& options) {
  if (config.dimension != 2) throw InvalidParameter("a q_x2 sweep requires dimension = 2");
  std::vector<SweepPoint> out;
  out.reserve(q_x2_list.size());
  for (const QParam& q : q_x2_list) {
    WalkConfig c = config;
    c.q_x2 = q;
    out.push_back({q, ensemble(c, options)});
  }
  return out;
}

}  // namespace qwalk
