#pragma once

// Experiment configuration: a flat key=value file, individual overrides, and
// an echo that parses back to the same configuration.

#include <charconv>
#include <cstdint>
#include <fstream>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>

#include "dtfa/cs_probe.hpp"
#include "dtfa/error.hpp"
#include "dtfa/phase_solver.hpp"
#include "dtfa/sparse_solver.hpp"

namespace dtfa::bench {

enum class ExperimentKind { example1, example2, example3, decompose_file, rip_probe, success_sweep };
enum class RipPhase { identity, example1 };

struct ExperimentConfig {
  ExperimentKind kind = ExperimentKind::example1;
  /// Example used by success-sweep (2 or 3).
  int example = 2;
  std::optional<std::size_t> grid_size;
  std::size_t samples = 120;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::size_t threads = 1;

  std::size_t M0 = 2;
  std::optional<double> eps0;
  std::size_t max_iter = 200;
  TransformMode transform_mode = TransformMode::nudft;

  std::optional<std::size_t> n_b;
  double bp_tol = 1e-6;
  std::size_t bp_max_iter = 2000;
  std::optional<double> noise_sigma;
  bool weighted = true;
  bool debias = true;
  double debias_threshold = 0.05;
  std::optional<double> success_threshold;
  InitialPhase init_phase = InitialPhase::nominal;
  std::optional<double> initial_cycles;

  std::string input;
  std::string output_dir = ".";
  std::optional<std::string> prefix;

  RipPhase rip_phase = RipPhase::example1;
  std::size_t rip_nb = 32;
  std::optional<std::size_t> rip_rows;
  bool rip_weighted = true;
  std::size_t rip_s_max = 4;
  std::size_t rip_trials = 200;
  bool rip_exhaustive = false;
  long osc_k = 3;
  int osc_order = 2;

  bool operator==(const ExperimentConfig&) const = default;
};

namespace detail {

inline constexpr std::string_view kAuto = "auto";

[[noreturn]] inline void bad_value(const std::string& key, const std::string& value, const std::string& why) {
  fail(ErrorKind::config, "key '" + key + "' value '" + value + "': " + why);
}

template <typename T>
T parse_number(const std::string& key, const std::string& text) {
  T out{};
  const char* first = text.data();
  const char* last = first + text.size();
  if (!text.empty() && text.front() == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, out);
  if (ec != std::errc() || ptr != last || first == last) bad_value(key, text, "not a valid number");
  if constexpr (std::is_floating_point_v<T>)
    if (!std::isfinite(out)) bad_value(key, text, "not finite");
  return out;
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  bad_value(key, text, "expected true or false");
}

template <typename T>
std::string format_number(T v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

template <typename T>
std::optional<T> parse_optional(const std::string& key, const std::string& text) {
  if (text == kAuto) return std::nullopt;
  return parse_number<T>(key, text);
}

template <typename T>
std::string format_optional(const std::optional<T>& v) {
  return v ? format_number(*v) : std::string(kAuto);
}

template <typename Enum>
struct EnumName {
  Enum value;
  std::string_view name;
};

inline constexpr EnumName<ExperimentKind> kKindNames[] = {
    {ExperimentKind::example1, "example1"},           {ExperimentKind::example2, "example2"},
    {ExperimentKind::example3, "example3"},           {ExperimentKind::decompose_file, "decompose-file"},
    {ExperimentKind::rip_probe, "rip-probe"},         {ExperimentKind::success_sweep, "success-sweep"}};
inline constexpr EnumName<TransformMode> kModeNames[] = {{TransformMode::nudft, "nudft"},
                                                         {TransformMode::fft_interp, "fft_interp"}};
inline constexpr EnumName<InitialPhase> kInitNames[] = {{InitialPhase::nominal, "nominal"},
                                                        {InitialPhase::periodogram, "periodogram"}};
inline constexpr EnumName<RipPhase> kRipPhaseNames[] = {{RipPhase::identity, "identity"},
                                                        {RipPhase::example1, "example1"}};

template <typename Enum, std::size_t N>
Enum parse_enum(const std::string& key, const std::string& text, const EnumName<Enum> (&names)[N]) {
  std::string choices;
  for (const auto& n : names) {
    if (text == n.name) return n.value;
    choices += (choices.empty() ? "" : "|") + std::string(n.name);
  }
  bad_value(key, text, "expected one of " + choices);
}

template <typename Enum, std::size_t N>
std::string format_enum(Enum v, const EnumName<Enum> (&names)[N]) {
  for (const auto& n : names)
    if (n.value == v) return std::string(n.name);
  return "?";
}

}  // namespace detail

inline std::string to_string(ExperimentKind k) { return detail::format_enum(k, detail::kKindNames); }

struct ConfigField {
  std::string key;
  std::string help;
  std::function<std::string(const ExperimentConfig&)> get;
  std::function<void(ExperimentConfig&, const std::string&)> set;
};

/// Every configurable key, in echo order.
inline const std::vector<ConfigField>& config_fields() {
  using namespace detail;
  using C = ExperimentConfig;
  static const std::vector<ConfigField> fields = [] {
    std::vector<ConfigField> f;
    auto size_field = [&](std::string key, std::string help, std::size_t C::*m) {
      f.push_back({key, std::move(help), [m](const C& c) { return format_number(c.*m); },
                   [m, key](C& c, const std::string& v) { c.*m = parse_number<std::size_t>(key, v); }});
    };
    auto real_field = [&](std::string key, std::string help, double C::*m) {
      f.push_back({key, std::move(help), [m](const C& c) { return format_number(c.*m); },
                   [m, key](C& c, const std::string& v) { c.*m = parse_number<double>(key, v); }});
    };
    auto bool_field = [&](std::string key, std::string help, bool C::*m) {
      f.push_back({key, std::move(help), [m](const C& c) { return std::string(c.*m ? "true" : "false"); },
                   [m, key](C& c, const std::string& v) { c.*m = parse_bool(key, v); }});
    };
    auto opt_size = [&](std::string key, std::string help, std::optional<std::size_t> C::*m) {
      f.push_back({key, std::move(help), [m](const C& c) { return format_optional(c.*m); },
                   [m, key](C& c, const std::string& v) { c.*m = parse_optional<std::size_t>(key, v); }});
    };
    auto opt_real = [&](std::string key, std::string help, std::optional<double> C::*m) {
      f.push_back({key, std::move(help), [m](const C& c) { return format_optional(c.*m); },
                   [m, key](C& c, const std::string& v) { c.*m = parse_optional<double>(key, v); }});
    };
    auto text_field = [&](std::string key, std::string help, std::string C::*m) {
      f.push_back({key, std::move(help), [m](const C& c) { return c.*m; },
                   [m](C& c, const std::string& v) { c.*m = v; }});
    };

    f.push_back({"kind", "example1|example2|example3|decompose-file|rip-probe|success-sweep",
                 [](const C& c) { return format_enum(c.kind, kKindNames); },
                 [](C& c, const std::string& v) { c.kind = parse_enum("kind", v, kKindNames); }});
    f.push_back({"example", "example used by success-sweep (2 or 3)",
                 [](const C& c) { return format_number(c.example); },
                 [](C& c, const std::string& v) { c.example = parse_number<int>("example", v); }});
    opt_size("grid_size", "uniform grid size; auto: 256 (example1), 4096 (examples 2, 3), 2048 (rip-probe)",
             &C::grid_size);
    size_field("samples", "random samples N_s for the sparse examples", &C::samples);
    size_field("trials", "trials in a success sweep", &C::trials);
    f.push_back({"seed", "base seed; trial i uses seed + i", [](const C& c) { return format_number(c.seed); },
                 [](C& c, const std::string& v) { c.seed = parse_number<std::uint64_t>("seed", v); }});
    size_field("threads", "worker threads for sweeps", &C::threads);
    size_field("M0", "band of the phase correction", &C::M0);
    opt_real("eps0", "stopping tolerance on ||theta step||_2; auto: 1e-8*sqrt(N), sparse 1e-5*sqrt(N_f)",
             &C::eps0);
    size_field("max_iter", "outer iteration cap", &C::max_iter);
    f.push_back({"transform_mode", "nudft|fft_interp", [](const C& c) { return format_enum(c.transform_mode, kModeNames); },
                 [](C& c, const std::string& v) { c.transform_mode = parse_enum("transform_mode", v, kModeNames); }});
    opt_size("n_b", "theta-space basis size; auto: next power of two >= 2*L0, capped at N_f", &C::n_b);
    real_field("bp_tol", "basis-pursuit data-fit bound relative to ||f||_2", &C::bp_tol);
    size_field("bp_max_iter", "Douglas-Rachford iteration cap per solve", &C::bp_max_iter);
    opt_real("noise_sigma", "noise level for the data-fit bound; auto: the example's noise level", &C::noise_sigma);
    bool_field("weighted", "scale sensing rows by sqrt(theta_bar'/N_f)", &C::weighted);
    bool_field("debias", "least-squares refit of the final spectrum on its significant support", &C::debias);
    real_field("debias_threshold", "support threshold relative to max |x|", &C::debias_threshold);
    opt_real("success_threshold", "relative Linf phase error for success; auto: 1e-2 (example 2), 5e-2 (example 3)",
             &C::success_threshold);
    f.push_back({"init_phase", "nominal|periodogram initial phase for the sparse examples",
                 [](const C& c) { return format_enum(c.init_phase, kInitNames); },
                 [](C& c, const std::string& v) { c.init_phase = parse_enum("init_phase", v, kInitNames); }});
    opt_real("initial_cycles", "cycle count of the linear initial phase; auto: dominant wavenumber",
             &C::initial_cycles);
    text_field("input", "signal CSV for decompose-file", &C::input);
    text_field("output_dir", "directory for the report and tables", &C::output_dir);
    f.push_back({"prefix", "output file prefix; auto: the experiment kind",
                 [](const C& c) { return c.prefix.value_or(std::string(kAuto)); },
                 [](C& c, const std::string& v) {
                   c.prefix = v == kAuto ? std::nullopt : std::optional<std::string>(v);
                 }});
    f.push_back({"rip_phase", "identity|example1 phase for the rip probe",
                 [](const C& c) { return format_enum(c.rip_phase, kRipPhaseNames); },
                 [](C& c, const std::string& v) { c.rip_phase = parse_enum("rip_phase", v, kRipPhaseNames); }});
    size_field("rip_nb", "columns N_b of the probed matrix", &C::rip_nb);
    opt_size("rip_rows", "random rows drawn from the grid; auto: every grid point", &C::rip_rows);
    bool_field("rip_weighted", "probe the weighted matrix", &C::rip_weighted);
    size_field("rip_s_max", "largest sparsity level probed", &C::rip_s_max);
    size_field("rip_trials", "random supports per sparsity level", &C::rip_trials);
    bool_field("rip_exhaustive", "enumerate every support (N_b <= 14)", &C::rip_exhaustive);
    f.push_back({"osc_k", "wavenumber k of the oscillatory sums", [](const C& c) { return format_number(c.osc_k); },
                 [](C& c, const std::string& v) { c.osc_k = parse_number<long>("osc_k", v); }});
    f.push_back({"osc_order", "order n in the oscillatory-sum bound",
                 [](const C& c) { return format_number(c.osc_order); },
                 [](C& c, const std::string& v) { c.osc_order = parse_number<int>("osc_order", v); }});
    return f;
  }();
  return fields;
}

inline void set_config_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  for (const auto& field : config_fields())
    if (field.key == key) return field.set(cfg, value);
  fail(ErrorKind::config, "unknown key '" + key + "'");
}

/// Applies "key=value" text on top of `cfg`. Blank lines and lines starting
/// with '#' or ';' are ignored.
inline void apply_config_text(ExperimentConfig& cfg, const std::string& text) {
  std::istringstream in(text);
  std::vector<CLI::ConfigItem> items;
  try {
    items = CLI::ConfigINI().from_config(in);
  } catch (const CLI::Error& e) {
    fail(ErrorKind::config, e.what());
  }
  for (const auto& item : items) {
    if (!item.parents.empty() || item.name == "++" || item.name == "--")
      fail(ErrorKind::config, "sections and dotted keys are not supported: '" + item.fullname() + "'");
    if (item.inputs.size() != 1)
      fail(ErrorKind::config, "key '" + item.name + "' needs exactly one value");
    set_config_value(cfg, item.name, item.inputs.front());
  }
}

inline void apply_config_file(ExperimentConfig& cfg, const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::config, "cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  apply_config_text(cfg, buf.str());
}

/// One "key=value" line per field, in field order.
inline std::string echo_config(const ExperimentConfig& cfg) {
  std::string out;
  for (const auto& field : config_fields()) out += field.key + "=" + field.get(cfg) + "\n";
  return out;
}

inline std::size_t effective_grid_size(const ExperimentConfig& cfg) {
  if (cfg.grid_size) return *cfg.grid_size;
  switch (cfg.kind) {
    case ExperimentKind::example1: return 256;
    case ExperimentKind::rip_probe: return 2048;
    default: return kSparseGridSize;
  }
}

inline int sparse_example_id(const ExperimentConfig& cfg) {
  if (cfg.kind == ExperimentKind::example2) return 2;
  if (cfg.kind == ExperimentKind::example3) return 3;
  return cfg.example;
}

inline double effective_success_threshold(const ExperimentConfig& cfg) {
  if (cfg.success_threshold) return *cfg.success_threshold;
  return sparse_example_id(cfg) == 3 ? 5e-2 : 1e-2;
}

inline std::string effective_prefix(const ExperimentConfig& cfg) { return cfg.prefix.value_or(to_string(cfg.kind)); }

/// Range checks that do not depend on data.
inline void validate(const ExperimentConfig& cfg) {
  auto bad = [](const std::string& m) { fail(ErrorKind::config, m); };
  const std::size_t n = effective_grid_size(cfg);
  if (n < 4) bad("grid_size must be at least 4");
  if (cfg.trials < 1) bad("trials must be at least 1");
  if (cfg.threads < 1) bad("threads must be at least 1");
  if (cfg.max_iter < 1) bad("max_iter must be at least 1");
  if (cfg.bp_max_iter < 1) bad("bp_max_iter must be at least 1");
  if (cfg.eps0 && !(*cfg.eps0 > 0.0)) bad("eps0 must be positive");
  if (!(cfg.bp_tol >= 0.0)) bad("bp_tol must be nonnegative");
  if (cfg.noise_sigma && !(*cfg.noise_sigma >= 0.0)) bad("noise_sigma must be nonnegative");
  if (!(cfg.debias_threshold >= 0.0 && cfg.debias_threshold < 1.0)) bad("debias_threshold must lie in [0, 1)");
  if (cfg.success_threshold && !(*cfg.success_threshold > 0.0)) bad("success_threshold must be positive");
  if (cfg.initial_cycles && !(*cfg.initial_cycles >= 1.0)) bad("initial_cycles must be at least 1");
  if (cfg.n_b && (*cfg.n_b < 2 || *cfg.n_b % 2 != 0)) bad("n_b must be even and at least 2");
  if (cfg.output_dir.empty()) bad("output_dir must not be empty");
  switch (cfg.kind) {
    case ExperimentKind::example2:
    case ExperimentKind::example3:
    case ExperimentKind::success_sweep:
      if (cfg.kind == ExperimentKind::success_sweep && cfg.example != 2 && cfg.example != 3)
        bad("example must be 2 or 3 for success-sweep");
      if (cfg.samples < 1 || cfg.samples > n) bad("samples must lie in [1, grid_size]");
      break;
    case ExperimentKind::decompose_file:
      if (cfg.input.empty()) bad("decompose-file needs input");
      break;
    case ExperimentKind::rip_probe:
      if (cfg.rip_nb < 2 || cfg.rip_nb % 2 != 0 || cfg.rip_nb > n) bad("rip_nb must be even and in [2, grid_size]");
      if (cfg.rip_rows && (*cfg.rip_rows < 1 || *cfg.rip_rows > n)) bad("rip_rows must lie in [1, grid_size]");
      if (cfg.rip_s_max < 1 || cfg.rip_s_max > cfg.rip_nb) bad("rip_s_max must lie in [1, rip_nb]");
      if (cfg.rip_trials < 1) bad("rip_trials must be at least 1");
      if (cfg.rip_exhaustive && cfg.rip_nb > kMaxExhaustiveColumns) bad("rip_exhaustive needs rip_nb <= 14");
      if (cfg.osc_order < 0) bad("osc_order must be nonnegative");
      break;
    case ExperimentKind::example1:
      break;
  }
}

}  // namespace dtfa::bench
