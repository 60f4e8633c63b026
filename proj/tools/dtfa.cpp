// dtfa: command-line front end for the decomposition experiments.
//
//   dtfa decompose <signal.csv> [options]
//   dtfa example <1|2|3> [options]
//   dtfa sweep [options]
//   dtfa rip-probe [options]
//
// Settings come from defaults, then --config FILE (key=value lines), then
// --set key=value and the per-key flags. Exit codes: 0 success, 1 usage or
// configuration error, 2 runtime failure. Every failure prints one line
//   error kind=<kind> reason="<text>"
// on stderr.

#include <iostream>
#include <map>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "dtfa/bench/config.hpp"
#include "dtfa/bench/experiment.hpp"
#include "dtfa/bench/report.hpp"
#include "dtfa/error.hpp"

namespace {

constexpr int kExitUsage = 1;
constexpr int kExitRuntime = 2;

int report_error(std::string_view kind, std::string reason, int code) {
  for (char& c : reason)
    if (c == '\n' || c == '\r') c = ' ';
  std::string quoted;
  for (char c : reason) {
    if (c == '"' || c == '\\') quoted += '\\';
    quoted += c;
  }
  std::cerr << "error kind=" << kind << " reason=\"" << quoted << "\"\n";
  return code;
}

std::string flag_name(std::string key) {
  for (char& c : key)
    if (c == '_') c = '-';
  return "--" + key;
}

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> overrides;
  std::map<std::string, std::string> flags;
  bool print_config = false;
};

void add_common(CLI::App* sub, CommonOptions& common) {
  sub->add_option("--config", common.config_path, "key=value configuration file");
  sub->add_option("--set", common.overrides, "override any key: --set key=value (repeatable)");
  sub->add_flag("--print-config", common.print_config, "print the effective configuration and exit");
  for (const auto& field : dtfa::bench::config_fields()) {
    if (field.key == "kind") continue;
    sub->add_option(flag_name(field.key), common.flags[field.key], field.help)->default_str(field.get({}));
  }
}

dtfa::bench::ExperimentConfig build_config(const CLI::App* sub, const CommonOptions& common,
                                           dtfa::bench::ExperimentKind kind) {
  using namespace dtfa::bench;
  ExperimentConfig cfg;
  if (!common.config_path.empty()) apply_config_file(cfg, common.config_path);
  for (const auto& kv : common.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) dtfa::fail(dtfa::ErrorKind::config, "--set expects key=value, got '" + kv + "'");
    set_config_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  for (const auto& field : config_fields()) {
    if (field.key == "kind") continue;
    if (sub->count(flag_name(field.key)) > 0) field.set(cfg, common.flags.at(field.key));
  }
  cfg.kind = kind;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Data-driven time-frequency decomposition experiments"};
  app.set_version_flag("--version", DTFA_VERSION);
  app.require_subcommand(1);

  CommonOptions common;
  std::string input;
  int example_id = 0;

  auto* decompose = app.add_subcommand("decompose", "decompose a uniformly sampled t,f CSV signal");
  decompose->add_option("signal", input, "signal CSV (same as --input)");
  add_common(decompose, common);

  auto* example = app.add_subcommand("example", "run example 1, 2 or 3 against its ground truth");
  example->add_option("id", example_id, "example number")->required()->check(CLI::Range(1, 3));
  add_common(example, common);

  auto* sweep = app.add_subcommand("sweep", "success-rate sweep over seeded sparse trials");
  add_common(sweep, common);

  auto* rip = app.add_subcommand("rip-probe", "coherence, restricted isometry and oscillatory-sum diagnostics");
  add_common(rip, common);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report_error("usage", e.what(), kExitUsage);
  }

  using dtfa::bench::ExperimentKind;
  try {
    dtfa::bench::ExperimentConfig cfg;
    if (decompose->parsed()) {
      cfg = build_config(decompose, common, ExperimentKind::decompose_file);
      if (!input.empty()) cfg.input = input;
    } else if (example->parsed()) {
      const ExperimentKind kinds[] = {ExperimentKind::example1, ExperimentKind::example2, ExperimentKind::example3};
      cfg = build_config(example, common, kinds[example_id - 1]);
      cfg.example = example_id;
    } else if (sweep->parsed()) {
      cfg = build_config(sweep, common, ExperimentKind::success_sweep);
    } else {
      cfg = build_config(rip, common, ExperimentKind::rip_probe);
    }
    dtfa::bench::validate(cfg);
    if (common.print_config) {
      std::cout << dtfa::bench::echo_config(cfg);
      return 0;
    }
    const auto report = dtfa::bench::run_experiment(cfg);
    const auto path = dtfa::bench::report_path(cfg);
    dtfa::bench::write_report(report, path);
    std::cout << dtfa::bench::render_report(report, path);
    return 0;
  } catch (const dtfa::Error& e) {
    const bool usage = e.kind() == dtfa::ErrorKind::config;
    return report_error(dtfa::to_string(e.kind()), e.detail(), usage ? kExitUsage : kExitRuntime);
  } catch (const std::exception& e) {
    return report_error("internal", e.what(), kExitRuntime);
  }
}
