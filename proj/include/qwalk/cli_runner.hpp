#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

#include "qwalk/evolution.hpp"
#include "qwalk/verification.hpp"

namespace qwalk {

/// Everything one invocation needs. See README for keys and defaults.
struct ExperimentSpec {
  WalkConfig walk;
  std::size_t realizations = 10;
  std::vector<QParam> sweep_q_x2;
  std::int64_t fit_full_start = 10;
  std::int64_t fit_asymptotic_start = 0;  ///< 0: ceil(t_max / 2)
  std::int64_t coherence_fit_start = 0;   ///< 0: asymptotic window start
  Engine engine = Engine::automatic;
  std::int64_t spectral_samples = 16384;
  double site_budget = 4e6;
  bool snapshot = false;
  bool write_csv = true;
  bool write_json = true;
  std::string output_dir;
  std::size_t verify_seeds_per_class = 20;

  ExperimentSpec();
  EnsembleOptions ensemble_options(unsigned threads) const;
  RunOptions run_options() const;
};

/// Flat `key = value` (or `key: value`) document; `#` starts a comment,
/// values may be quoted. Unknown or repeated keys, malformed values and
/// invalid combinations raise ConfigError naming the line and key.
ExperimentSpec parse_spec(std::string_view text);
ExperimentSpec load_spec(const std::filesystem::path& path);

/// Canonical `key = value` lines for every key, in a fixed order. Parsing the
/// echo reproduces the spec exactly.
std::string echo_spec(const ExperimentSpec& spec);

/// Accepts a decimal number or a multiple of pi: "pi", "pi/4", "3*pi/4",
/// "0.5pi", "-pi/2".
double parse_angle(std::string_view text);
/// "1", "-0.5", "0.5i", "-i", "0.6+0.8i", "1e-3-2i".
Complex parse_complex(std::string_view text);

enum class Subcommand { run, ensemble, sweep, verify };
Subcommand parse_subcommand(std::string_view text);

struct ExecuteOptions {
  std::filesystem::path out_dir;
  unsigned threads = 1;
  std::ostream* log = nullptr;  ///< progress and summaries; nullptr for silence
};

struct ResultBundle {
  std::vector<std::filesystem::path> files;
  bool passed = true;  ///< false only when a verify check fails
};

/// Validates the spec, runs the subcommand and writes its files.
ResultBundle execute(const ExperimentSpec& spec, Subcommand command, const ExecuteOptions& options);

/// Fixed trajectory table. Missing observables are empty fields.
inline constexpr const char* kTrajectoryColumns =
    "t,var_x1,var_x2,var_R,trace_distance,entropy_c,entropy_c1,entropy_c2,negativity,coherence_x1";

/// Comment header (the spec echo, every line prefixed with "# ") followed by
/// the column line and one row per record, 17 significant digits.
std::string trajectory_csv(const ExperimentSpec& spec, const std::vector<ObservableRecord>& records);

}  // namespace qwalk
