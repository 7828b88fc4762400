#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "qwalk/cli_runner.hpp"
#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

using nlohmann::ordered_json;

constexpr const char* kFormatVersion = "qwalk-output v1";

std::string field(const std::optional<double>& v) {
  return v ? fmt::format("{:.17g}", *v) : std::string();
}

std::string commented(const std::string& text) {
  std::string out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out += "# " + line + "\n";
  return out;
}

ordered_json optional_number(const std::optional<double>& v) {
  return v ? ordered_json(*v) : ordered_json(nullptr);
}

ordered_json config_json(const ExperimentSpec& spec) {
  ordered_json j;
  j["format"] = kFormatVersion;
  j["config_text"] = echo_spec(spec);
  return j;
}

ordered_json window_json(const FitWindow& w) { return ordered_json::array({w.lo, w.hi}); }

ordered_json fit_json(const std::optional<FitResult>& f) {
  if (!f) return nullptr;
  ordered_json j;
  j["exponent"] = f->exponent;
  j["intercept"] = f->intercept;
  j["window"] = window_json(f->window);
  j["residual"] = f->residual;
  j["points"] = f->points;
  return j;
}

ordered_json summary_json(const std::optional<ExponentSummary>& s) {
  if (!s) return nullptr;
  ordered_json j;
  j["mean"] = s->mean;
  j["stddev"] = s->stddev;
  j["values"] = s->values;
  return j;
}

ordered_json records_json(const std::vector<ObservableRecord>& records) {
  ordered_json arr = ordered_json::array();
  for (const auto& r : records) {
    ordered_json j;
    j["t"] = r.t;
    j["var_x1"] = optional_number(r.var_x1);
    j["var_x2"] = optional_number(r.var_x2);
    j["var_R"] = optional_number(r.var_r);
    j["trace_distance"] = optional_number(r.trace_distance);
    j["entropy_c"] = optional_number(r.entropy_c);
    j["entropy_c1"] = optional_number(r.entropy_c1);
    j["entropy_c2"] = optional_number(r.entropy_c2);
    j["negativity"] = optional_number(r.negativity);
    j["coherence_x1"] = optional_number(r.coherence_x1);
    arr.push_back(std::move(j));
  }
  return arr;
}

ordered_json ensemble_json(const EnsembleStats& s) {
  ordered_json j;
  j["realizations"] = s.realizations;
  j["seed_rule"] = "realization k uses splitmix64(seed ^ splitmix64(k))";
  j["fit_windows"] = {{"full", window_json(s.full_window)},
                      {"asymptotic", window_json(s.asymptotic_window)},
                      {"coherence", window_json(s.coherence_window)}};
  j["alpha_x1_full"] = summary_json(s.x1_full);
  j["alpha_x1_asymptotic"] = summary_json(s.x1_asymptotic);
  j["alpha_x2_full"] = summary_json(s.x2_full);
  j["alpha_x2_asymptotic"] = summary_json(s.x2_asymptotic);
  j["coherence_decay"] = fit_json(s.coherence_decay);
  j["max_negativity"] = s.max_negativity;
  ordered_json runs = ordered_json::array();
  for (const auto& r : s.runs) {
    ordered_json rj;
    rj["index"] = r.index;
    rj["seed"] = r.seed;
    rj["engine"] = to_string(r.engine);
    rj["alpha_x1_full"] = fit_json(r.x1_full);
    rj["alpha_x1_asymptotic"] = fit_json(r.x1_asymptotic);
    rj["alpha_x2_full"] = fit_json(r.x2_full);
    rj["alpha_x2_asymptotic"] = fit_json(r.x2_asymptotic);
    rj["coherence_decay"] = fit_json(r.coherence);
    rj["max_negativity"] = r.max_negativity;
    runs.push_back(std::move(rj));
  }
  j["runs"] = std::move(runs);
  return j;
}

std::string exponent_cell(const std::optional<FitResult>& f) {
  return f ? fmt::format("{:.17g}", f->exponent) : std::string();
}

class Writer {
 public:
  Writer(std::filesystem::path dir, std::ostream* log) : dir_(std::move(dir)), log_(log) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(fmt::format("cannot create output directory '{}': {}", dir_.string(), ec.message()));
  }

  void write(const std::string& name, const std::string& payload) {
    const auto path = dir_ / name;
    std::ofstream out(path, std::ios::binary);
    out << payload;
    out.close();
    if (!out) throw Error(fmt::format("failed to write '{}'", path.string()));
    files_.push_back(path);
    if (log_) *log_ << "wrote " << path.string() << "\n";
  }

  void write_json(const std::string& name, const ordered_json& j) { write(name, j.dump(2) + "\n"); }

  std::vector<std::filesystem::path> files() const { return files_; }

 private:
  std::filesystem::path dir_;
  std::ostream* log_;
  std::vector<std::filesystem::path> files_;
};

void log_summary(std::ostream* log, const std::string& label, const EnsembleStats& s) {
  if (!log) return;
  auto show = [&](const char* name, const std::optional<ExponentSummary>& e) {
    if (e) *log << fmt::format("  {:<22} {:.4f} +- {:.4f}\n", name, e->mean, e->stddev);
  };
  *log << label << " (" << s.realizations << " realizations)\n";
  show("alpha_x1 full", s.x1_full);
  show("alpha_x1 asymptotic", s.x1_asymptotic);
  show("alpha_x2 full", s.x2_full);
  show("alpha_x2 asymptotic", s.x2_asymptotic);
  if (s.coherence_decay) *log << fmt::format("  {:<22} {:.4f}\n", "coherence beta", s.coherence_decay->exponent);
}

}  // namespace

std::string trajectory_csv(const ExperimentSpec& spec, const std::vector<ObservableRecord>& records) {
  std::string out = fmt::format("# {}\n", kFormatVersion) + commented(echo_spec(spec));
  out += kTrajectoryColumns;
  out += "\n";
  for (const auto& r : records) {
    out += fmt::format("{},{},{},{},{},{},{},{},{},{}\n", r.t, field(r.var_x1), field(r.var_x2),
                       field(r.var_r), field(r.trace_distance), field(r.entropy_c), field(r.entropy_c1),
                       field(r.entropy_c2), field(r.negativity), field(r.coherence_x1));
  }
  return out;
}

ResultBundle execute(const ExperimentSpec& spec, Subcommand command, const ExecuteOptions& options) {
  spec.walk.validate();
  std::filesystem::path dir = options.out_dir;
  if (dir.empty()) dir = spec.output_dir;
  if (dir.empty()) throw ConfigError("no output directory: pass --out or set output_dir");
  Writer w(dir, options.log);
  ResultBundle bundle;

  switch (command) {
    case Subcommand::run: {
      RunOptions ro = spec.run_options();
      SparseState last;
      if (spec.snapshot) ro.on_state = [&](const SparseState& s) {
        if (s.time() == spec.walk.t_max) last = s;
      };
      const Trajectory tr = run(spec.walk, ro);
      if (spec.write_csv) w.write("trajectory.csv", trajectory_csv(spec, tr.records));
      if (spec.write_json) {
        ordered_json j = config_json(spec);
        j["engine"] = to_string(tr.engine);
        j["spectral_samples"] = tr.spectral_samples;
        j["steps_x1"] = tr.steps.d1;
        j["steps_x2"] = tr.steps.d2;
        j["records"] = records_json(tr.records);
        w.write_json("run.json", j);
      }
      if (spec.snapshot) {
        if (spec.walk.dimension != 2 || tr.engine != Engine::sparse) {
          throw ConfigError("snapshot export needs a 2-D run on the sparse engine");
        }
        std::ostringstream snap;
        snap << commented(echo_spec(spec));
        write_snapshot(snap, last);
        w.write("snapshot.csv", snap.str());
      }
      if (options.log) *options.log << fmt::format("run finished: {} records, engine {}\n", tr.records.size(), to_string(tr.engine));
      break;
    }
    case Subcommand::ensemble: {
      const EnsembleStats s = ensemble(spec.walk, spec.ensemble_options(options.threads));
      if (spec.write_json) {
        ordered_json j = config_json(spec);
        j["ensemble"] = ensemble_json(s);
        j["mean_records"] = records_json(s.mean_records);
        w.write_json("ensemble.json", j);
      }
      if (spec.write_csv) {
        std::string csv = fmt::format("# {}\n", kFormatVersion) + commented(echo_spec(spec));
        csv += "index,seed,engine,alpha_x1_full,alpha_x1_asymptotic,alpha_x2_full,alpha_x2_asymptotic,"
               "coherence_beta,max_negativity\n";
        for (const auto& r : s.runs) {
          csv += fmt::format("{},{},{},{},{},{},{},{},{:.17g}\n", r.index, r.seed, to_string(r.engine),
                             exponent_cell(r.x1_full), exponent_cell(r.x1_asymptotic),
                             exponent_cell(r.x2_full), exponent_cell(r.x2_asymptotic),
                             exponent_cell(r.coherence), r.max_negativity);
        }
        w.write("ensemble_realizations.csv", csv);
        w.write("ensemble_mean.csv", trajectory_csv(spec, s.mean_records));
      }
      log_summary(options.log, "ensemble", s);
      break;
    }
    case Subcommand::sweep: {
      const auto points = sweep_q(spec.walk, spec.sweep_q_x2, spec.ensemble_options(options.threads));
      if (spec.write_csv) {
        std::string csv = fmt::format("# {}\n", kFormatVersion) + commented(echo_spec(spec));
        csv += "q_x2,alpha_x1_mean,alpha_x1_stddev,alpha_x1_full_mean,alpha_x1_full_stddev,window_lo,window_hi\n";
        for (const auto& p : points) {
          const auto& a = p.stats.x1_asymptotic;
          const auto& f = p.stats.x1_full;
          csv += fmt::format("{},{},{},{},{},{},{}\n", p.q_x2.to_string(),
                             a ? fmt::format("{:.17g}", a->mean) : "", a ? fmt::format("{:.17g}", a->stddev) : "",
                             f ? fmt::format("{:.17g}", f->mean) : "", f ? fmt::format("{:.17g}", f->stddev) : "",
                             p.stats.asymptotic_window.lo, p.stats.asymptotic_window.hi);
        }
        w.write("sweep.csv", csv);
      }
      if (spec.write_json) {
        ordered_json j = config_json(spec);
        ordered_json arr = ordered_json::array();
        for (const auto& p : points) {
          ordered_json pj;
          pj["q_x2"] = p.q_x2.to_string();
          pj["ensemble"] = ensemble_json(p.stats);
          arr.push_back(std::move(pj));
        }
        j["sweep"] = std::move(arr);
        w.write_json("sweep.json", j);
      }
      for (const auto& p : points) log_summary(options.log, "q_x2 = " + p.q_x2.to_string(), p.stats);
      break;
    }
    case Subcommand::verify: {
      VerificationOptions vo;
      vo.seed = spec.walk.seed;
      vo.seeds_per_class = spec.verify_seeds_per_class;
      const VerificationReport report = run_verification_suite(vo);
      ordered_json j = config_json(spec);
      ordered_json checks = ordered_json::array();
      for (const auto& c : report.checks) {
        checks.push_back({{"name", c.name}, {"passed", c.passed}, {"value", c.value},
                          {"tolerance", c.tolerance}, {"detail", c.detail}});
        if (options.log) {
          *options.log << fmt::format("[{}] {}: {:.3e} (tolerance {:.1e}) {}\n", c.passed ? "PASS" : "FAIL",
                                      c.name, c.value, c.tolerance, c.detail);
        }
      }
      j["checks"] = std::move(checks);
      j["all_passed"] = report.all_passed();
      w.write_json("verify.json", j);
      bundle.passed = report.all_passed();
      break;
    }
  }
  bundle.files = w.files();
  return bundle;
}

}  // namespace qwalk
