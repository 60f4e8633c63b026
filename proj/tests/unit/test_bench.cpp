#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <gtest/gtest.h>

#include "dtfa/bench/experiment.hpp"
#include "support/generators.hpp"

using namespace dtfa;
using namespace dtfa::bench;

namespace {

namespace fs = std::filesystem;

ErrorKind kind_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected dtfa::Error";
  return ErrorKind::io;
}

class TempDir {
 public:
  TempDir() {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    path_ = fs::temp_directory_path() / (std::string("dtfa_") + info->test_suite_name() + "_" + info->name());
    fs::remove_all(path_);
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  const fs::path& path() const { return path_; }

 private:
  fs::path path_;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

void write_file(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

// Report text with the timing lines removed.
std::string without_timings(const std::string& text) {
  std::istringstream in(text);
  std::string out;
  for (std::string line; std::getline(in, line);)
    if (line.rfind("timing.", 0) != 0) out += line + "\n";
  return out;
}

ExperimentConfig random_config(gen::Engine& rng) {
  ExperimentConfig c;
  c.kind = static_cast<ExperimentKind>(gen::index(rng, 0, 5));
  c.example = static_cast<int>(gen::index(rng, 2, 3));
  if (gen::index(rng, 0, 1)) c.grid_size = gen::index(rng, 4, 1 << 14);
  c.samples = gen::index(rng, 1, 500);
  c.trials = gen::index(rng, 1, 1000);
  c.seed = rng();
  c.threads = gen::index(rng, 1, 16);
  c.M0 = gen::index(rng, 1, 30);
  if (gen::index(rng, 0, 1)) c.eps0 = std::exp(gen::uniform(rng, -30, 0));
  c.max_iter = gen::index(rng, 1, 10000);
  c.transform_mode = gen::index(rng, 0, 1) ? TransformMode::nudft : TransformMode::fft_interp;
  if (gen::index(rng, 0, 1)) c.n_b = 2 * gen::index(rng, 1, 512);
  c.bp_tol = gen::uniform(rng, 0, 1e-3);
  c.bp_max_iter = gen::index(rng, 1, 100000);
  if (gen::index(rng, 0, 1)) c.noise_sigma = gen::uniform(rng, 0, 1);
  c.weighted = gen::index(rng, 0, 1);
  c.debias = gen::index(rng, 0, 1);
  c.debias_threshold = gen::uniform(rng, 0, 0.5);
  if (gen::index(rng, 0, 1)) c.success_threshold = gen::uniform(rng, 1e-4, 1);
  c.init_phase = gen::index(rng, 0, 1) ? InitialPhase::nominal : InitialPhase::periodogram;
  if (gen::index(rng, 0, 1)) c.initial_cycles = gen::uniform(rng, 1, 300);
  c.input = "signal_" + std::to_string(rng() % 1000) + ".csv";
  c.output_dir = "out/" + std::to_string(rng() % 1000);
  if (gen::index(rng, 0, 1)) c.prefix = "run" + std::to_string(rng() % 100);
  c.rip_phase = gen::index(rng, 0, 1) ? RipPhase::identity : RipPhase::example1;
  c.rip_nb = 2 * gen::index(rng, 1, 64);
  if (gen::index(rng, 0, 1)) c.rip_rows = gen::index(rng, 1, 4096);
  c.rip_weighted = gen::index(rng, 0, 1);
  c.rip_s_max = gen::index(rng, 1, 10);
  c.rip_trials = gen::index(rng, 1, 5000);
  c.rip_exhaustive = gen::index(rng, 0, 1);
  c.osc_k = static_cast<long>(gen::index(rng, 0, 40)) - 20;
  c.osc_order = static_cast<int>(gen::index(rng, 0, 8));
  return c;
}

}  // namespace

TEST(Config, EchoRoundTripsDefaults) {
  const ExperimentConfig defaults;
  ExperimentConfig parsed;
  parsed.seed = 99;
  apply_config_text(parsed, echo_config(defaults));
  EXPECT_EQ(parsed, defaults);
}

TEST(Config, EchoRoundTripsRandomConfigs) {
  gen::Engine rng(51);
  for (int trial = 0; trial < 200; ++trial) {
    const ExperimentConfig cfg = random_config(rng);
    ExperimentConfig parsed;
    apply_config_text(parsed, echo_config(cfg));
    ASSERT_EQ(parsed, cfg) << echo_config(cfg);
  }
}

TEST(Config, TextFormat) {
  ExperimentConfig cfg;
  apply_config_text(cfg, "# comment\n; other comment\n\nkind = success-sweep\nsamples=80\neps0=auto\nweighted=false\n");
  EXPECT_EQ(cfg.kind, ExperimentKind::success_sweep);
  EXPECT_EQ(cfg.samples, 80u);
  EXPECT_FALSE(cfg.eps0.has_value());
  EXPECT_FALSE(cfg.weighted);
  apply_config_text(cfg, "eps0=1e-7\n");
  ASSERT_TRUE(cfg.eps0.has_value());
  EXPECT_EQ(*cfg.eps0, 1e-7);
}

TEST(Config, Errors) {
  ExperimentConfig cfg;
  EXPECT_EQ(kind_of([&] { apply_config_text(cfg, "no_such_key=1\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { apply_config_text(cfg, "samples=many\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { apply_config_text(cfg, "samples=-3\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { apply_config_text(cfg, "kind=example9\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { apply_config_text(cfg, "weighted=maybe\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { apply_config_text(cfg, "[section]\nsamples=3\n"); }), ErrorKind::config);
  EXPECT_EQ(kind_of([&] { apply_config_file(cfg, "/nonexistent/dtfa.cfg"); }), ErrorKind::config);
}

TEST(Config, Validation) {
  auto invalid = [](auto&& edit) {
    ExperimentConfig cfg;
    edit(cfg);
    return kind_of([&] { validate(cfg); });
  };
  EXPECT_EQ(invalid([](ExperimentConfig& c) { c.trials = 0; }), ErrorKind::config);
  EXPECT_EQ(invalid([](ExperimentConfig& c) { c.n_b = 7; }), ErrorKind::config);
  EXPECT_EQ(invalid([](ExperimentConfig& c) { c.eps0 = 0.0; }), ErrorKind::config);
  EXPECT_EQ(invalid([](ExperimentConfig& c) { c.kind = ExperimentKind::decompose_file; }), ErrorKind::config);
  EXPECT_EQ(invalid([](ExperimentConfig& c) {
              c.kind = ExperimentKind::success_sweep;
              c.example = 1;
            }),
            ErrorKind::config);
  EXPECT_EQ(invalid([](ExperimentConfig& c) {
              c.kind = ExperimentKind::example2;
              c.samples = 5000;
            }),
            ErrorKind::config);
  EXPECT_NO_THROW(validate(ExperimentConfig{}));
}

TEST(SignalCsv, LoadsEightRows) {
  TempDir dir;
  std::string text = "t,f\n";
  for (int j = 0; j < 8; ++j) text += std::to_string(j / 8.0) + "," + std::to_string(std::cos(2 * std::numbers::pi * j / 8)) + "\n";
  write_file(dir.path() / "s.csv", text);
  const Signal s = load_signal_csv((dir.path() / "s.csv").string());
  ASSERT_EQ(s.size(), 8u);
  EXPECT_TRUE(s.is_uniform());
  EXPECT_NEAR(s.values()[2], 0.0, 1e-6);
  EXPECT_NEAR(s.values()[4], -1.0, 1e-6);
}

TEST(SignalCsv, Errors) {
  TempDir dir;
  const auto p = (dir.path() / "s.csv").string();
  write_file(p, "0,1\n0.25,2\n0.6,3\n0.75,4\n");
  EXPECT_EQ(kind_of([&] { load_signal_csv(p); }), ErrorKind::non_uniform_grid);
  write_file(p, "0,1\n0.5,abc\n");
  EXPECT_EQ(kind_of([&] { load_signal_csv(p); }), ErrorKind::parse);
  write_file(p, "0,1,2\n0.5,1,2\n");
  EXPECT_EQ(kind_of([&] { load_signal_csv(p); }), ErrorKind::parse);
  write_file(p, "0,1\n");
  EXPECT_EQ(kind_of([&] { load_signal_csv(p); }), ErrorKind::parse);
  EXPECT_EQ(kind_of([&] { load_signal_csv((dir.path() / "missing.csv").string()); }), ErrorKind::io);
}

TEST(SignalCsv, Example1RoundTripIsBitIdentical) {
  TempDir dir;
  const auto [signal, truth] = gen_example_signal(1, TimeGrid(256), 0);
  const auto p = (dir.path() / "ex1.csv").string();
  write_signal_csv(p, signal);
  const Signal back = load_signal_csv(p);
  ASSERT_EQ(back.size(), signal.size());
  for (std::size_t j = 0; j < signal.size(); ++j) ASSERT_EQ(back.values()[j], signal.values()[j]);
}

TEST(Report, EmptyReportHasConfigEchoOnly) {
  TempDir dir;
  ExperimentReport report;
  report.config_echo = echo_config(ExperimentConfig{});
  const auto path = dir.path() / "empty.txt";
  write_report(report, path);
  const std::string text = read_file(path);
  std::istringstream in(text);
  std::size_t lines = 0;
  for (std::string line; std::getline(in, line); ++lines) ASSERT_EQ(line.rfind("config.", 0), 0u) << line;
  EXPECT_EQ(lines, config_fields().size());
  EXPECT_EQ(std::distance(fs::directory_iterator(dir.path()), fs::directory_iterator{}), 1);
}

TEST(Report, TablesAreWrittenAsCsv) {
  TempDir dir;
  ExperimentReport report;
  Table t{"curve", {"x", "y"}, {}};
  t.add({0.5, -1.25});
  t.add({1.0, 3.0});
  report.tables.push_back(t);
  report.metric("count", std::size_t{2});
  write_report(report, dir.path() / "sub" / "run.txt");
  EXPECT_EQ(read_file(dir.path() / "sub" / "run_curve.csv"), "x,y\n0.5,-1.25\n1,3\n");
  EXPECT_EQ(read_file(dir.path() / "sub" / "run.txt"), "metric.count=2\ntable.curve=run_curve.csv\n");
}

TEST(RunExperiment, Example1ExactRecovery) {
  ExperimentConfig cfg;
  const auto report = run_experiment(cfg);
  ASSERT_NE(report.find_metric("max_imf_error"), nullptr);
  EXPECT_LE(std::stod(*report.find_metric("max_imf_error")), 1e-8);
  EXPECT_LE(std::stod(*report.find_metric("max_phase_error")), 1e-8);
  EXPECT_EQ(*report.find_metric("converged"), "true");
  const Table* errors = report.find_table("errors");
  ASSERT_NE(errors, nullptr);
  EXPECT_EQ(errors->rows.size(), 256u);
  for (const auto& row : errors->rows)
    for (std::size_t c = 1; c < row.size(); ++c) ASSERT_GE(row[c], 0.0);
  ASSERT_NE(report.find_table("trace"), nullptr);
}

TEST(RunExperiment, IdenticalConfigsGiveIdenticalReports) {
  TempDir dir;
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::example2;
  cfg.output_dir = dir.path().string();
  const fs::path a = dir.path() / "a", b = dir.path() / "b";
  write_report(run_experiment(cfg), a / "run.txt");
  write_report(run_experiment(cfg), b / "run.txt");
  const std::string ta = read_file(a / "run.txt"), tb = read_file(b / "run.txt");
  EXPECT_NE(ta.find("timing.wall_seconds="), std::string::npos);
  EXPECT_EQ(without_timings(ta), without_timings(tb));
  for (const char* table : {"run_errors.csv", "run_trace.csv", "run_samples.csv"})
    EXPECT_EQ(read_file(a / table), read_file(b / table)) << table;
}

TEST(RunExperiment, ConfigEchoMatchesParsedConfig) {
  ExperimentConfig cfg;
  apply_config_text(cfg, "kind=rip-probe\nrip_phase=identity\nrip_nb=16\ngrid_size=16\nrip_s_max=2\nrip_trials=5\n");
  const auto report = run_experiment(cfg);
  ExperimentConfig parsed;
  apply_config_text(parsed, report.config_echo);
  EXPECT_EQ(parsed, cfg);
}

TEST(RunExperiment, RipProbeIdentity) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::rip_probe;
  cfg.rip_phase = RipPhase::identity;
  cfg.rip_nb = 32;
  cfg.grid_size = 32;
  const auto report = run_experiment(cfg);
  EXPECT_LE(std::stod(*report.find_metric("mutual_coherence")), 1e-12);
  const Table* delta = report.find_table("delta_s");
  ASSERT_NE(delta, nullptr);
  for (const auto& row : delta->rows) EXPECT_LE(row[1], 1e-10);
  EXPECT_GE(std::stod(*report.find_metric("osc_decay_order")), 2.0);
}

TEST(RunExperiment, SuccessSweepRatesInUnitInterval) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::success_sweep;
  cfg.trials = 6;
  cfg.threads = 3;
  const auto report = run_experiment(cfg);
  const double rate = std::stod(*report.find_metric("success_rate"));
  EXPECT_GE(rate, 0.0);
  EXPECT_LE(rate, 1.0);
  EXPECT_EQ(report.find_table("trials")->rows.size(), 6u);
  EXPECT_EQ(report.timings.back().second, "parallel");
}

TEST(RunExperiment, ErrorsCarryExperimentContext) {
  ExperimentConfig cfg;
  cfg.kind = ExperimentKind::decompose_file;
  cfg.input = "/nonexistent/signal.csv";
  try {
    run_experiment(cfg);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::io);
    EXPECT_EQ(e.detail().rfind("decompose-file: ", 0), 0u) << e.detail();
  }
}
