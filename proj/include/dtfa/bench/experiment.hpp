#pragma once

// Dispatch from an ExperimentConfig to the library and assembly of the report.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "dtfa/basis_pursuit.hpp"
#include "dtfa/bench/config.hpp"
#include "dtfa/bench/report.hpp"
#include "dtfa/bench/signal_io.hpp"
#include "dtfa/core.hpp"
#include "dtfa/cs_probe.hpp"
#include "dtfa/phase_solver.hpp"
#include "dtfa/sparse_solver.hpp"
#include "dtfa/synthetic.hpp"

#ifndef DTFA_VERSION
#define DTFA_VERSION "0.1.0"
#endif

namespace dtfa::bench {

inline SolverOptions solver_options(const ExperimentConfig& cfg) {
  SolverOptions o;
  o.M0 = cfg.M0;
  o.eps0 = cfg.eps0;
  o.max_iter = cfg.max_iter;
  o.transform_mode = cfg.transform_mode;
  return o;
}

inline SparseOptions sparse_options(const ExperimentConfig& cfg) {
  SparseOptions o;
  o.solver = solver_options(cfg);
  o.n_b = cfg.n_b;
  o.bp_tol = cfg.bp_tol;
  o.noise_sigma = cfg.noise_sigma.value_or(0.0);
  o.weighted = cfg.weighted;
  o.bp_max_iter = cfg.bp_max_iter;
  o.debias = cfg.debias;
  o.debias_threshold = cfg.debias_threshold;
  return o;
}

/// θ - θ_ref shifted by the multiple of 2π that best aligns the two.
inline std::vector<double> aligned_phase_difference(const PhaseFn& theta, const PhaseFn& reference) {
  const std::size_t n = theta.size();
  std::vector<double> d(n);
  double mean = 0.0;
  for (std::size_t j = 0; j < n; ++j) mean += (d[j] = theta.values()[j] - reference.values()[j]);
  const double shift = kTwoPi * std::round(mean / static_cast<double>(n) / kTwoPi);
  for (double& x : d) x -= shift;
  return d;
}

namespace detail {

inline Table trace_table(const IterTrace& trace) {
  Table t{"trace", {"iteration", "beta", "step_norm", "residual_norm", "freq_error"}, {}};
  for (const auto& r : trace.records)
    t.add({static_cast<double>(r.iteration), r.beta, r.step_norm, r.residual_norm, r.freq_error.value_or(NAN)});
  return t;
}

/// Error-vs-t curves against ground truth plus max-norm metrics.
inline void add_truth_errors(ExperimentReport& report, const Decomposition& d, const GroundTruth& truth) {
  const std::size_t n = d.a0.size();
  const auto imf = truth.imf();
  const auto dphase = aligned_phase_difference(d.phase, truth.phase);
  Table t{"errors", {"t", "imf_error", "phase_error", "a0_error", "a1_error"}, {}};
  double e_imf = 0.0, e_phase = 0.0, e_a0 = 0.0, e_a1 = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double ei = std::abs(d.imf[j] - imf[j]);
    const double ep = std::abs(dphase[j]);
    const double e0 = std::abs(d.a0[j] - truth.a0[j]);
    const double e1 = std::abs(d.a1[j] - truth.a1[j]);
    e_imf = std::max(e_imf, ei);
    e_phase = std::max(e_phase, ep);
    e_a0 = std::max(e_a0, e0);
    e_a1 = std::max(e_a1, e1);
    t.add({static_cast<double>(j) / static_cast<double>(n), ei, ep, e0, e1});
  }
  report.metric("max_imf_error", e_imf);
  report.metric("max_phase_error", e_phase);
  report.metric("max_a0_error", e_a0);
  report.metric("max_a1_error", e_a1);
  report.metric("relative_phase_error", relative_phase_error(d.phase, truth.phase));
  report.tables.push_back(std::move(t));
}

inline void add_run_metrics(ExperimentReport& report, const Decomposition& d) {
  report.metric("iterations", d.trace.records.size());
  report.metric("converged", d.converged);
  if (d.trace.initial_freq_error) report.metric("initial_freq_error", *d.trace.initial_freq_error);
  if (!d.trace.records.empty() && d.trace.records.back().freq_error)
    report.metric("final_freq_error", *d.trace.records.back().freq_error);
  report.tables.push_back(trace_table(d.trace));
}

inline PhaseFn initial_phase(const ExperimentConfig& cfg, const Signal& signal, double nominal_cycles) {
  const TimeGrid grid = signal.is_uniform() ? signal.grid() : signal.samples().parent_grid();
  if (cfg.initial_cycles) return PhaseFn::linear(grid, *cfg.initial_cycles);
  if (cfg.init_phase == InitialPhase::periodogram) return default_initial_phase(signal);
  return PhaseFn::linear(grid, nominal_cycles);
}

inline void run_example1(const ExperimentConfig& cfg, ExperimentReport& report) {
  const TimeGrid grid(effective_grid_size(cfg));
  const auto [signal, truth] = gen_example_signal(1, grid, cfg.seed);
  const PhaseFn theta0 = initial_phase(cfg, signal, 10.0);
  const Decomposition d = decompose_well_resolved(signal, theta0, solver_options(cfg), &truth.phase);
  report.metric("grid_size", grid.size());
  report.metric("initial_cycles", theta0.cycle_count());
  add_run_metrics(report, d);
  add_truth_errors(report, d, truth);
}

inline void run_sparse_example(const ExperimentConfig& cfg, ExperimentReport& report) {
  const int id = sparse_example_id(cfg);
  const SparseProblem problem = make_sparse_problem(id, cfg.samples, cfg.seed, effective_grid_size(cfg));
  const SparseOptions opts = options_for(problem, sparse_options(cfg));
  const PhaseFn theta0 = initial_phase(cfg, problem.samples, 100.0);
  const std::size_t n_f = problem.samples.samples().parent_size();
  const double threshold = effective_success_threshold(cfg);
  report.metric("grid_size", n_f);
  report.metric("samples", problem.samples.size());
  report.metric("n_b", opts.n_b.value_or(default_basis_size(theta0.cycle_count(), n_f)));
  report.metric("noise_sigma", opts.noise_sigma);
  report.metric("initial_cycles", theta0.cycle_count());
  report.metric("success_threshold", threshold);
  Table samples{"samples", {"t", "f"}, {}};
  const auto times = problem.samples.times();
  for (std::size_t j = 0; j < problem.samples.size(); ++j) samples.add({times[j], problem.samples.values()[j]});
  const Decomposition d = decompose_sparse(problem.samples, theta0, opts, &problem.truth.phase);
  add_run_metrics(report, d);
  add_truth_errors(report, d, problem.truth);
  report.metric("success", relative_phase_error(d.phase, problem.truth.phase) <= threshold);
  report.tables.push_back(std::move(samples));
}

inline void run_decompose_file(const ExperimentConfig& cfg, ExperimentReport& report) {
  const Signal signal = load_signal_csv(cfg.input);
  const PhaseFn theta0 = cfg.initial_cycles ? PhaseFn::linear(signal.grid(), *cfg.initial_cycles)
                                            : default_initial_phase(signal);
  const Decomposition d = decompose_well_resolved(signal, theta0, solver_options(cfg));
  report.metric("grid_size", signal.size());
  report.metric("initial_cycles", theta0.cycle_count());
  report.metric("residual_norm", norm2(d.residual));
  report.metric("cycle_count", d.phase.cycle_count());
  add_run_metrics(report, d);
  Table t{"decomposition", {"t", "f", "a0", "a1", "phase", "imf", "residual"}, {}};
  for (std::size_t j = 0; j < signal.size(); ++j)
    t.add({signal.grid().at(j), signal.values()[j], d.a0[j], d.a1[j], d.phase.values()[j], d.imf[j], d.residual[j]});
  report.tables.push_back(std::move(t));
}

inline void run_success_sweep(const ExperimentConfig& cfg, ExperimentReport& report) {
  const double threshold = effective_success_threshold(cfg);
  const auto outcomes = run_sparse_trials(cfg.example, cfg.samples, cfg.trials, cfg.seed, threshold,
                                          sparse_options(cfg), cfg.init_phase, cfg.threads, effective_grid_size(cfg));
  std::size_t hits = 0, errors = 0, converged = 0;
  std::vector<double> finite;
  Table t{"trials", {"seed", "phase_error", "success", "converged", "failed"}, {}};
  for (const auto& o : outcomes) {
    hits += o.success ? 1 : 0;
    errors += o.error ? 1 : 0;
    converged += o.converged ? 1 : 0;
    if (std::isfinite(o.phase_error)) finite.push_back(o.phase_error);
    t.add({static_cast<double>(o.seed), o.phase_error, o.success ? 1.0 : 0.0, o.converged ? 1.0 : 0.0,
           o.error ? 1.0 : 0.0});
  }
  std::sort(finite.begin(), finite.end());
  report.metric("example", static_cast<std::size_t>(cfg.example));
  report.metric("samples", cfg.samples);
  report.metric("trials", cfg.trials);
  report.metric("success_threshold", threshold);
  report.metric("successes", hits);
  report.metric("success_rate", success_rate(outcomes));
  report.metric("converged_runs", converged);
  report.metric("failed_runs", errors);
  if (!finite.empty()) report.metric("median_phase_error", finite[finite.size() / 2]);
  report.tables.push_back(std::move(t));
}

inline void run_rip_probe(const ExperimentConfig& cfg, ExperimentReport& report) {
  const std::size_t n_f = effective_grid_size(cfg);
  const TimeGrid grid(n_f);
  const PhaseFn theta =
      cfg.rip_phase == RipPhase::identity ? PhaseFn::linear(grid, 1.0) : example_ground_truth(1, grid).phase;
  const PhaseFn theta_bar = normalize_phase(theta).theta_bar;
  const ScatterSet rows = cfg.rip_rows ? subsample_random(grid, *cfg.rip_rows, cfg.seed) : all_samples(n_f);
  const SensingMatrix u = build_matrix(theta_bar, rows, cfg.rip_nb, cfg.rip_weighted);
  const double nu0 = mutual_coherence(u);
  const double threshold = 1.0 / (16.0 * static_cast<double>(cfg.rip_nb));
  report.metric("grid_size", n_f);
  report.metric("rows", rows.size());
  report.metric("n_b", cfg.rip_nb);
  report.metric("oversampling", static_cast<double>(n_f) / static_cast<double>(cfg.rip_nb));
  report.metric("max_theta_bar_prime",
                *std::max_element(theta_bar.derivative().begin(), theta_bar.derivative().end()));
  report.metric("mutual_coherence", nu0);
  report.metric("coherence_threshold", threshold);
  report.metric("coherence_below_threshold", nu0 <= threshold);

  Table delta{"delta_s", {"S", "delta_lower", "supports", "exhaustive"}, {}};
  const RipMode mode = cfg.rip_exhaustive ? RipMode::exhaustive : RipMode::monte_carlo;
  for (std::size_t s = 1; s <= cfg.rip_s_max; ++s) {
    const RipEstimate e = estimate_delta_s(u, s, cfg.rip_trials, cfg.seed, mode);
    delta.add({static_cast<double>(s), e.delta_lower, static_cast<double>(e.trials), cfg.rip_exhaustive ? 1.0 : 0.0});
  }
  report.tables.push_back(std::move(delta));

  // Oscillatory sums for φ' = 1 + 0.5 cos 2πt over doublings of L.
  const TrigWarp phi{{0.5}, {}};
  Table osc{"oscillatory_sum", {"L", "modulus", "bound", "ratio"}, {}};
  std::vector<double> moduli;
  for (std::size_t l : {32u, 64u, 128u}) {
    const OscillatorySum r = oscillatory_sum(phi, cfg.osc_k, l, cfg.osc_order);
    moduli.push_back(r.modulus);
    osc.add({static_cast<double>(l), r.modulus, r.bound, r.ratio});
  }
  report.metric("osc_decay_order", consistent_decay_order(moduli));
  report.tables.push_back(std::move(osc));
}

}  // namespace detail

/// Runs the configured experiment. Errors from the library propagate with the
/// experiment kind prefixed to the message.
inline ExperimentReport run_experiment(const ExperimentConfig& cfg) {
  validate(cfg);
  ExperimentReport report;
  report.config_echo = echo_config(cfg);
  report.version = DTFA_VERSION;
  const auto start = std::chrono::steady_clock::now();
  try {
    switch (cfg.kind) {
      case ExperimentKind::example1: detail::run_example1(cfg, report); break;
      case ExperimentKind::example2:
      case ExperimentKind::example3: detail::run_sparse_example(cfg, report); break;
      case ExperimentKind::decompose_file: detail::run_decompose_file(cfg, report); break;
      case ExperimentKind::success_sweep: detail::run_success_sweep(cfg, report); break;
      case ExperimentKind::rip_probe: detail::run_rip_probe(cfg, report); break;
    }
  } catch (const Error& e) {
    fail(e.kind(), to_string(cfg.kind) + ": " + e.detail());
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report.timings.emplace_back("wall_seconds", format_value(secs));
  report.timings.emplace_back("mode", cfg.threads > 1 && cfg.kind == ExperimentKind::success_sweep ? "parallel" : "single");
  return report;
}

inline std::filesystem::path report_path(const ExperimentConfig& cfg) {
  return std::filesystem::path(cfg.output_dir) / (effective_prefix(cfg) + ".txt");
}

}  // namespace dtfa::bench
