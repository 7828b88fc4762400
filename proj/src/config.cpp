#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "qwalk/cli_runner.hpp"
#include "qwalk/errors.hpp"

namespace qwalk {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::string_view unquote(std::string_view s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front()) {
    s = s.substr(1, s.size() - 2);
  }
  return trim(s);
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t at = s.find(sep, start);
    out.push_back(trim(s.substr(start, at == std::string_view::npos ? std::string_view::npos : at - start)));
    if (at == std::string_view::npos) break;
    start = at + 1;
  }
  return out;
}

double parse_double(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw ConfigError(fmt::format("'{}' is not a finite number", text));
  }
  return v;
}

std::int64_t parse_int(std::string_view text) {
  text = trim(text);
  std::int64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(fmt::format("'{}' is not an integer", text));
  }
  return v;
}

std::uint64_t parse_uint(std::string_view text) {
  text = trim(text);
  std::uint64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (text.empty() || ec != std::errc() || ptr != end) {
    throw ConfigError(fmt::format("'{}' is not a nonnegative integer", text));
  }
  return v;
}

bool parse_bool(std::string_view text) {
  if (text == "true" || text == "yes" || text == "on" || text == "1") return true;
  if (text == "false" || text == "no" || text == "off" || text == "0") return false;
  throw ConfigError(fmt::format("'{}' is not a boolean (true/false)", text));
}

std::int64_t positive(std::int64_t v) {
  if (v < 1) throw ConfigError(fmt::format("must be >= 1, got {}", v));
  return v;
}

std::int64_t nonnegative(std::int64_t v) {
  if (v < 0) throw ConfigError(fmt::format("must be >= 0, got {}", v));
  return v;
}

QParam parse_q(std::string_view text) {
  const QParam q = QParam::parse(text);
  try {
    check_support(q);
  } catch (const DegenerateDistribution& e) {
    throw ConfigError(fmt::format("q = {} is rejected: {}", q.to_string(), e.what()));
  }
  return q;
}

std::string format_double(double v) { return fmt::format("{:.17g}", v); }

std::string format_complex(Complex c) {
  return fmt::format("{:.17g}{:+.17g}i", c.real(), c.imag());
}

std::vector<Complex> preset_coin(std::string_view name, int dimension) {
  const double h = std::numbers::sqrt2 / 2;
  if (name == "uniform") return {};
  if (name == "hadamard_symmetric") {
    const Amplitude2 a = {h, Complex(0.0, h)};
    if (dimension == 1) return {a[0], a[1]};
    return {a[0] * a[0], a[0] * a[1], a[1] * a[0], a[1] * a[1]};
  }
  return {};
}

using Setter = std::function<void(ExperimentSpec&, std::string_view)>;

struct KeyDef {
  const char* name;
  Setter set;
  std::function<std::string(const ExperimentSpec&)> show;
};

const std::vector<KeyDef>& keys() {
  static const std::vector<KeyDef> table = {
      {"dimension",
       [](ExperimentSpec& s, std::string_view v) {
         const auto d = parse_int(v);
         if (d != 1 && d != 2) throw ConfigError(fmt::format("dimension must be 1 or 2, got {}", d));
         s.walk.dimension = static_cast<int>(d);
       },
       [](const ExperimentSpec& s) { return std::to_string(s.walk.dimension); }},
      {"q_x1", [](ExperimentSpec& s, std::string_view v) { s.walk.q_x1 = parse_q(v); },
       [](const ExperimentSpec& s) { return s.walk.q_x1.to_string(); }},
      {"q_x2", [](ExperimentSpec& s, std::string_view v) { s.walk.q_x2 = parse_q(v); },
       [](const ExperimentSpec& s) { return s.walk.q_x2.to_string(); }},
      {"coin",
       [](ExperimentSpec& s, std::string_view v) {
         try {
           s.walk.coin_kind = parse_coin_kind(v);
         } catch (const InvalidParameter& e) {
           throw ConfigError(e.what());
         }
       },
       [](const ExperimentSpec& s) { return to_string(s.walk.coin_kind); }},
      {"theta_x1", [](ExperimentSpec& s, std::string_view v) { s.walk.coin_x1.theta = parse_angle(v); },
       [](const ExperimentSpec& s) { return format_double(s.walk.coin_x1.theta); }},
      {"beta_x1", [](ExperimentSpec& s, std::string_view v) { s.walk.coin_x1.beta = parse_angle(v); },
       [](const ExperimentSpec& s) { return format_double(s.walk.coin_x1.beta); }},
      {"gamma_x1", [](ExperimentSpec& s, std::string_view v) { s.walk.coin_x1.gamma = parse_angle(v); },
       [](const ExperimentSpec& s) { return format_double(s.walk.coin_x1.gamma); }},
      {"theta_x2", [](ExperimentSpec& s, std::string_view v) { s.walk.coin_x2.theta = parse_angle(v); },
       [](const ExperimentSpec& s) { return format_double(s.walk.coin_x2.theta); }},
      {"beta_x2", [](ExperimentSpec& s, std::string_view v) { s.walk.coin_x2.beta = parse_angle(v); },
       [](const ExperimentSpec& s) { return format_double(s.walk.coin_x2.beta); }},
      {"gamma_x2", [](ExperimentSpec& s, std::string_view v) { s.walk.coin_x2.gamma = parse_angle(v); },
       [](const ExperimentSpec& s) { return format_double(s.walk.coin_x2.gamma); }},
      // Presets are resolved after the whole document is read, because they
      // depend on the dimension; see parse_spec.
      {"initial_coin", nullptr,
       [](const ExperimentSpec& s) {
         if (s.walk.initial_coin.empty()) return std::string("uniform");
         std::string out;
         for (std::size_t i = 0; i < s.walk.initial_coin.size(); ++i) {
           if (i) out += ", ";
           out += format_complex(s.walk.initial_coin[i]);
         }
         return out;
       }},
      {"t_max", [](ExperimentSpec& s, std::string_view v) { s.walk.t_max = positive(parse_int(v)); },
       [](const ExperimentSpec& s) { return std::to_string(s.walk.t_max); }},
      {"seed", [](ExperimentSpec& s, std::string_view v) { s.walk.seed = parse_uint(v); },
       [](const ExperimentSpec& s) { return std::to_string(s.walk.seed); }},
      {"realizations",
       [](ExperimentSpec& s, std::string_view v) {
         s.realizations = static_cast<std::size_t>(positive(parse_int(v)));
       },
       [](const ExperimentSpec& s) { return std::to_string(s.realizations); }},
      {"sweep_q_x2",
       [](ExperimentSpec& s, std::string_view v) {
         s.sweep_q_x2.clear();
         for (auto item : split(v, ',')) s.sweep_q_x2.push_back(parse_q(unquote(item)));
         if (s.sweep_q_x2.empty()) throw ConfigError("sweep list is empty");
       },
       [](const ExperimentSpec& s) {
         std::string out;
         for (std::size_t i = 0; i < s.sweep_q_x2.size(); ++i) {
           if (i) out += ", ";
           out += s.sweep_q_x2[i].to_string();
         }
         return out;
       }},
      {"variances", [](ExperimentSpec& s, std::string_view v) { s.walk.observables.variances = parse_bool(v); },
       [](const ExperimentSpec& s) { return std::string(s.walk.observables.variances ? "true" : "false"); }},
      {"trace_distance",
       [](ExperimentSpec& s, std::string_view v) { s.walk.observables.trace_distance = parse_bool(v); },
       [](const ExperimentSpec& s) { return std::string(s.walk.observables.trace_distance ? "true" : "false"); }},
      {"entropies", [](ExperimentSpec& s, std::string_view v) { s.walk.observables.entropies = parse_bool(v); },
       [](const ExperimentSpec& s) { return std::string(s.walk.observables.entropies ? "true" : "false"); }},
      {"negativity", [](ExperimentSpec& s, std::string_view v) { s.walk.observables.negativity = parse_bool(v); },
       [](const ExperimentSpec& s) { return std::string(s.walk.observables.negativity ? "true" : "false"); }},
      {"coherence", [](ExperimentSpec& s, std::string_view v) { s.walk.observables.coherence = parse_bool(v); },
       [](const ExperimentSpec& s) { return std::string(s.walk.observables.coherence ? "true" : "false"); }},
      {"record_stride",
       [](ExperimentSpec& s, std::string_view v) { s.walk.observables.record_stride = positive(parse_int(v)); },
       [](const ExperimentSpec& s) { return std::to_string(s.walk.observables.record_stride); }},
      {"entropy_stride",
       [](ExperimentSpec& s, std::string_view v) { s.walk.observables.entropy_stride = positive(parse_int(v)); },
       [](const ExperimentSpec& s) { return std::to_string(s.walk.observables.entropy_stride); }},
      {"coherence_stride",
       [](ExperimentSpec& s, std::string_view v) { s.walk.observables.coherence_stride = positive(parse_int(v)); },
       [](const ExperimentSpec& s) { return std::to_string(s.walk.observables.coherence_stride); }},
      {"fit_full_start", [](ExperimentSpec& s, std::string_view v) { s.fit_full_start = positive(parse_int(v)); },
       [](const ExperimentSpec& s) { return std::to_string(s.fit_full_start); }},
      {"fit_asymptotic_start",
       [](ExperimentSpec& s, std::string_view v) { s.fit_asymptotic_start = nonnegative(parse_int(v)); },
       [](const ExperimentSpec& s) { return std::to_string(s.fit_asymptotic_start); }},
      {"coherence_fit_start",
       [](ExperimentSpec& s, std::string_view v) { s.coherence_fit_start = nonnegative(parse_int(v)); },
       [](const ExperimentSpec& s) { return std::to_string(s.coherence_fit_start); }},
      {"engine",
       [](ExperimentSpec& s, std::string_view v) {
         try {
           s.engine = parse_engine(v);
         } catch (const InvalidParameter& e) {
           throw ConfigError(e.what());
         }
       },
       [](const ExperimentSpec& s) { return to_string(s.engine); }},
      {"spectral_samples",
       [](ExperimentSpec& s, std::string_view v) { s.spectral_samples = positive(parse_int(v)); },
       [](const ExperimentSpec& s) { return std::to_string(s.spectral_samples); }},
      {"site_budget",
       [](ExperimentSpec& s, std::string_view v) {
         s.site_budget = parse_double(v);
         if (s.site_budget <= 0.0) throw ConfigError("site_budget must be positive");
       },
       [](const ExperimentSpec& s) { return format_double(s.site_budget); }},
      {"snapshot", [](ExperimentSpec& s, std::string_view v) { s.snapshot = parse_bool(v); },
       [](const ExperimentSpec& s) { return std::string(s.snapshot ? "true" : "false"); }},
      {"formats",
       [](ExperimentSpec& s, std::string_view v) {
         s.write_csv = s.write_json = false;
         for (auto f : split(v, ',')) {
           if (f == "csv") s.write_csv = true;
           else if (f == "json") s.write_json = true;
           else throw ConfigError(fmt::format("unknown output format '{}' (csv, json)", f));
         }
       },
       [](const ExperimentSpec& s) {
         if (s.write_csv && s.write_json) return std::string("csv, json");
         return std::string(s.write_csv ? "csv" : "json");
       }},
      {"output_dir", [](ExperimentSpec& s, std::string_view v) { s.output_dir = std::string(v); },
       [](const ExperimentSpec& s) { return s.output_dir.empty() ? std::string("\"\"") : s.output_dir; }},
      {"verify_seeds",
       [](ExperimentSpec& s, std::string_view v) {
         s.verify_seeds_per_class = static_cast<std::size_t>(positive(parse_int(v)));
       },
       [](const ExperimentSpec& s) { return std::to_string(s.verify_seeds_per_class); }},
  };
  return table;
}

}  // namespace

ExperimentSpec::ExperimentSpec()
    : sweep_q_x2{QParam::finite(0.5), QParam::finite(0.6), QParam::finite(0.8), QParam::finite(1.0),
                 QParam::finite(1.5), QParam::finite(2.0), QParam::infinity()} {}

EnsembleOptions ExperimentSpec::ensemble_options(unsigned threads) const {
  EnsembleOptions o;
  o.realizations = realizations;
  o.fit_full_start = fit_full_start;
  o.fit_asymptotic_start = fit_asymptotic_start;
  o.coherence_fit_start = coherence_fit_start;
  o.threads = threads;
  o.run = run_options();
  return o;
}

RunOptions ExperimentSpec::run_options() const {
  RunOptions o;
  o.engine = engine;
  o.spectral_samples = spectral_samples;
  o.site_budget = site_budget;
  return o;
}

double parse_angle(std::string_view text) {
  text = trim(text);
  const std::size_t at = text.find("pi");
  if (at == std::string_view::npos) return parse_double(text);
  std::string_view before = trim(text.substr(0, at));
  std::string_view after = trim(text.substr(at + 2));
  double factor = 1.0;
  if (!before.empty() && before.back() == '*') before = trim(before.substr(0, before.size() - 1));
  if (before == "-") factor = -1.0;
  else if (!before.empty() && before != "+") factor = parse_double(before);
  double divisor = 1.0;
  if (!after.empty()) {
    if (after.front() != '/') throw ConfigError(fmt::format("cannot parse angle '{}'", text));
    divisor = parse_double(after.substr(1));
    if (divisor == 0.0) throw ConfigError(fmt::format("angle '{}' divides by zero", text));
  }
  return factor * std::numbers::pi / divisor;
}

Complex parse_complex(std::string_view text) {
  text = trim(text);
  if (text.empty()) throw ConfigError("empty complex value");
  if (text.back() != 'i') return {parse_double(text), 0.0};
  const std::string_view body = text.substr(0, text.size() - 1);
  // Split at the last sign that is neither leading nor part of an exponent.
  std::size_t split_at = std::string_view::npos;
  for (std::size_t i = body.size(); i-- > 1;) {
    if ((body[i] == '+' || body[i] == '-') && body[i - 1] != 'e' && body[i - 1] != 'E') {
      split_at = i;
      break;
    }
  }
  auto imag_of = [&](std::string_view s) {
    s = trim(s);
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_double(s);
  };
  if (split_at == std::string_view::npos) return {0.0, imag_of(body)};
  return {parse_double(body.substr(0, split_at)), imag_of(body.substr(split_at))};
}

ExperimentSpec parse_spec(std::string_view text) {
  ExperimentSpec spec;
  std::set<std::string> seen;
  std::string coin_text;
  std::size_t coin_line = 0;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = text.find('\n', pos);
    std::string_view line = text.substr(pos, eol == std::string_view::npos ? std::string_view::npos : eol - pos);
    pos = eol == std::string_view::npos ? text.size() + 1 : eol + 1;
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::size_t sep = std::min(line.find('='), line.find(':'));
    if (sep == std::string_view::npos) {
      throw ConfigError(fmt::format("line {}: expected 'key = value', got '{}'", line_no, line));
    }
    const std::string key(trim(line.substr(0, sep)));
    const std::string_view value = unquote(line.substr(sep + 1));
    const auto& table = keys();
    const auto def = std::find_if(table.begin(), table.end(), [&](const KeyDef& k) { return key == k.name; });
    if (def == table.end()) throw ConfigError(fmt::format("line {}: unknown key '{}'", line_no, key));
    if (!seen.insert(key).second) throw ConfigError(fmt::format("line {}: key '{}' given twice", line_no, key));
    if (key == "initial_coin") {
      coin_text = std::string(value);
      coin_line = line_no;
      continue;
    }
    try {
      def->set(spec, value);
    } catch (const Error& e) {
      throw ConfigError(fmt::format("line {}: {}: {}", line_no, key, e.what()));
    }
  }

  if (!coin_text.empty()) {
    try {
      if (coin_text == "uniform" || coin_text == "hadamard_symmetric") {
        spec.walk.initial_coin = preset_coin(coin_text, spec.walk.dimension);
      } else {
        spec.walk.initial_coin.clear();
        for (auto item : split(coin_text, ',')) spec.walk.initial_coin.push_back(parse_complex(item));
      }
    } catch (const Error& e) {
      throw ConfigError(fmt::format("line {}: initial_coin: {}", coin_line, e.what()));
    }
  }

  try {
    spec.walk.validate();
    if (spec.walk.dimension == 2) (void)SparseState::init_localized({0, 0}, spec.walk.initial_coin4());
    else (void)LineState::init_localized(0, spec.walk.initial_coin2());
  } catch (const Error& e) {
    throw ConfigError(fmt::format("invalid configuration: {}", e.what()));
  }
  return spec;
}

ExperimentSpec load_spec(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot read config file '{}'", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_spec(buffer.str());
}

std::string echo_spec(const ExperimentSpec& spec) {
  std::string out = "# resolved configuration\n";
  for (const auto& k : keys()) out += fmt::format("{} = {}\n", k.name, k.show(spec));
  return out;
}

Subcommand parse_subcommand(std::string_view text) {
  if (text == "run") return Subcommand::run;
  if (text == "ensemble") return Subcommand::ensemble;
  if (text == "sweep") return Subcommand::sweep;
  if (text == "verify") return Subcommand::verify;
  throw ConfigError(fmt::format("unknown subcommand '{}'", text));
}

}  // namespace qwalk
