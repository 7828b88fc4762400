#pragma once

#include <cstdint>
#include <functional>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "qwalk/coin_ops.hpp"
#include "qwalk/observables.hpp"
#include "qwalk/step_distribution.hpp"
#include "qwalk/walker_state.hpp"

namespace qwalk {

enum class CoinKind { separable, entangling };

std::string to_string(CoinKind kind);
CoinKind parse_coin_kind(std::string_view text);

/// Which observables a run records, and how often.
///
/// A record is written at every t with t % record_stride == 0 and always at
/// t_max. Within a record, entropies and negativity are evaluated when
/// t % entropy_stride == 0 and coherence when t % coherence_stride == 0
/// (again always at t_max).
struct ObservableToggles {
  bool variances = true;
  bool trace_distance = true;
  bool entropies = true;
  bool negativity = true;
  bool coherence = false;
  std::int64_t record_stride = 1;
  std::int64_t entropy_stride = 1;
  std::int64_t coherence_stride = 5;
};

struct WalkConfig {
  int dimension = 2;
  QParam q_x1 = QParam::finite(0.5);
  QParam q_x2 = QParam::finite(0.5);
  CoinKind coin_kind = CoinKind::entangling;
  CoinParams coin_x1{std::numbers::pi / 4, std::numbers::pi / 2, std::numbers::pi / 2};
  CoinParams coin_x2{std::numbers::pi / 4, std::numbers::pi / 2, std::numbers::pi / 2};
  /// Four amplitudes in 2-D, two in 1-D. Empty selects the uniform
  /// superposition.
  std::vector<Complex> initial_coin;
  std::int64_t t_max = 100;
  std::uint64_t seed = 0;
  ObservableToggles observables;

  /// Throws InvalidParameter / DegenerateDistribution / InvalidState.
  void validate() const;
  Amplitude4 initial_coin4() const;
  Amplitude2 initial_coin2() const;
};

/// Realized step sizes; d1[t - 1] and d2[t - 1] belong to step t. d2 is empty
/// for a 1-D walk.
struct StepSequence {
  std::vector<std::int64_t> d1;
  std::vector<std::int64_t> d2;
};

/// Draws Delta1 then Delta2 at every t from one RandomStream seeded with
/// config.seed: two variates per 2-D step, one per 1-D step.
StepSequence draw_steps(const WalkConfig& config);

CoinMatrix4 walk_coin(const WalkConfig& config);
CoinMatrix2 walk_coin_1d(const WalkConfig& config);

/// Coin, then shift.
void step(SparseState& state, const CoinMatrix4& coin, std::int64_t d1, std::int64_t d2);
void step(LineState& state, const CoinMatrix2& coin, std::int64_t d);

enum class Engine {
  automatic,
  sparse,    ///< exact sparse wavefunction
  spectral,  ///< Monte Carlo over quasi-momenta; moments and coin state only
};

std::string to_string(Engine engine);
Engine parse_engine(std::string_view text);

struct RunOptions {
  Engine engine = Engine::automatic;
  /// Momentum samples for the spectral engine (rounded up to a square).
  std::int64_t spectral_samples = 16384;
  /// The automatic engine switches to spectral when the bounding box of
  /// reachable sites, (sum d1 + 1)(sum d2 + 1), exceeds this.
  double site_budget = 4e6;
  /// Called after every step of a sparse 2-D run.
  std::function<void(const SparseState&)> on_state;
  std::function<void(const LineState&)> on_line;
};

struct Trajectory {
  std::vector<ObservableRecord> records;
  StepSequence steps;
  Engine engine = Engine::sparse;
  std::int64_t spectral_samples = 0;  ///< 0 for exact runs
};

/// Engine that `run` would use for these steps.
Engine resolve_engine(const WalkConfig& config, const StepSequence& steps,
                      const RunOptions& options);

/// Deterministic in (config, options). Observables the selected engine cannot
/// provide (trace distance and coherence under the spectral engine) are left
/// absent.
Trajectory run(const WalkConfig& config, const RunOptions& options = {});
Trajectory run_with_steps(const WalkConfig& config, const StepSequence& steps,
                          const RunOptions& options = {});

struct ExponentSummary {
  std::vector<double> values;  ///< by realization index
  double mean = 0.0;
  double stddev = 0.0;  ///< sample standard deviation; 0 for one realization
};

struct RealizationResult {
  std::size_t index = 0;
  std::uint64_t seed = 0;
  Engine engine = Engine::sparse;
  std::optional<FitResult> x1_full, x1_asymptotic, x2_full, x2_asymptotic;
  std::optional<FitResult> coherence;
  double max_negativity = 0.0;  ///< 0 when negativity was never evaluated
  std::vector<ObservableRecord> records;
};

struct EnsembleOptions {
  std::size_t realizations = 10;
  std::int64_t fit_full_start = 10;
  /// 0 selects ceil(t_max / 2).
  std::int64_t fit_asymptotic_start = 0;
  /// 0 selects the asymptotic window start.
  std::int64_t coherence_fit_start = 0;
  unsigned threads = 1;
  RunOptions run;
};

struct EnsembleStats {
  std::size_t realizations = 0;
  FitWindow full_window;
  FitWindow asymptotic_window;
  FitWindow coherence_window;
  std::optional<ExponentSummary> x1_full, x1_asymptotic, x2_full, x2_asymptotic;
  /// Fit of the realization-averaged coherence series.
  std::optional<FitResult> coherence_decay;
  double max_negativity = 0.0;
  /// Per-t average over realizations of every field present in all of them.
  std::vector<ObservableRecord> mean_records;
  std::vector<RealizationResult> runs;
};

/// Seed of realization k: derive_seed(config.seed, k).
std::uint64_t realization_seed(std::uint64_t seed, std::size_t k);

FitWindow full_window(std::int64_t t_max, const EnsembleOptions& options);
FitWindow asymptotic_window(std::int64_t t_max, const EnsembleOptions& options);

/// Realizations run on `options.threads` workers; results are gathered by
/// realization index, so the output does not depend on the thread count.
EnsembleStats ensemble(const WalkConfig& config, const EnsembleOptions& options);

struct SweepPoint {
  QParam q_x2;
  EnsembleStats stats;
};

/// One ensemble per q_x2 with everything else held fixed; output follows the
/// input order.
std::vector<SweepPoint> sweep_q(const WalkConfig& config, const std::vector<QParam>& q_x2_list,
                                const EnsembleOptions& options);

}  // namespace qwalk
