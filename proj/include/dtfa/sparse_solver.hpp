#pragma once

// Decomposition from randomly sampled data: the θ-space spectrum comes from
// basis pursuit over warped Fourier atoms instead of a quadrature.

#include <atomic>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "dtfa/basis_pursuit.hpp"
#include "dtfa/core.hpp"
#include "dtfa/phase_solver.hpp"
#include "dtfa/synthetic.hpp"
#include "dtfa/theta_spectral.hpp"

namespace dtfa {

/// Default stopping scale for the sparse loop: eps0 = 1e-5·sqrt(N_f). Basis
/// pursuit solved to a relative tolerance leaves θ steps near this level.
inline constexpr double kSparseEps0Scale = 1e-5;

struct SparseOptions {
  /// Unset solver.eps0 means kSparseEps0Scale·sqrt(N_f).
  SolverOptions solver;
  /// Number of θ-space wavenumbers; unset means the next power of two at or
  /// above 2·L0, capped at N_f.
  std::optional<std::size_t> n_b;
  /// Data-fit bound relative to ||f||_2 (weighted right-hand side when weighted).
  double bp_tol = 1e-6;
  /// Known noise level; when positive the bound becomes σ·||w||_2 instead.
  double noise_sigma = 0.0;
  bool weighted = true;
  std::size_t bp_max_iter = 2000;
  double bp_rel_tol = 1e-6;
  double bp_step_scale = 0.1;
  /// For the reported envelopes, refit by least squares on the significant
  /// part of the l1 support, the entries above debias_threshold·max|x|, when it
  /// holds at most half as many columns as there are samples.
  bool debias = true;
  double debias_threshold = 0.05;
};

inline std::size_t default_basis_size(double cycles, std::size_t n_f) {
  const auto target = static_cast<std::size_t>(std::ceil(2.0 * std::max(cycles, 1.0)));
  return std::min(std::bit_ceil(std::max<std::size_t>(target, 2)), n_f);
}

namespace detail {

struct SparseAnalyser {
  const Signal& samples;
  const SparseOptions& opts;
  std::size_t n_b;
  std::optional<Eigen::VectorXcd> warm;

  PhaseAnalysis operator()(const PhaseFn& theta, bool refit) {
    const auto [theta_bar, cycles] = normalize_phase(theta);
    if (carrier_index(cycles) < 1) fail(ErrorKind::invalid_phase, "phase completes less than one cycle");
    const SensingMatrix a = build_matrix(theta_bar, samples.samples(), n_b, opts.weighted);
    Eigen::VectorXcd rhs(static_cast<Eigen::Index>(a.rows()));
    double w2 = 0.0;
    for (std::size_t j = 0; j < a.rows(); ++j) {
      rhs(static_cast<Eigen::Index>(j)) = a.row_weights[j] * samples.values()[j];
      w2 += a.row_weights[j] * a.row_weights[j];
    }
    BasisPursuitOptions bp;
    bp.tol = opts.noise_sigma > 0.0 ? opts.noise_sigma * std::sqrt(w2) : opts.bp_tol * rhs.norm();
    bp.max_iter = opts.bp_max_iter;
    bp.rel_tol = opts.bp_rel_tol;
    bp.step_scale = opts.bp_step_scale;
    BPSolution sol = basis_pursuit(a, rhs, bp, warm ? &*warm : nullptr);
    warm = sol.state;
    if (refit && opts.debias) {
      const double floor = opts.debias_threshold * sol.x.cwiseAbs().maxCoeff();
      std::vector<std::size_t> keep;
      for (std::size_t k : sol.support)
        if (std::abs(sol.x(static_cast<Eigen::Index>(k))) > floor) keep.push_back(k);
      if (!keep.empty() && 2 * keep.size() <= a.rows()) sol.x = refit_on_support(a, rhs, keep);
    }
    enforce_conjugate_symmetry(sol.x, a.k_min);

    ThetaSpectrum spectrum;
    spectrum.k_min = a.k_min;
    spectrum.coeffs.assign(sol.x.data(), sol.x.data() + sol.x.size());
    spectrum.cycle_count = cycles;
    spectrum.phase_offset = theta.start();
    const auto [a_hat, b_hat] = extract_envelope_spectra(spectrum, cycles);
    const auto mean_hat = low_band(spectrum, cycles);
    const auto points = theta_bar.values();
    return {{inverse_theta_fft(a_hat, points), inverse_theta_fft(b_hat, points)}, inverse_theta_fft(mean_hat, points),
            cycles};
  }
};

}  // namespace detail

/// Sparse-sample loop. Envelopes and mean are evaluated on the full parent
/// grid of the samples, where θ lives; the residual is reported at the samples.
inline Decomposition decompose_sparse(const Signal& samples, const PhaseFn& theta0, const SparseOptions& opts,
                                      const PhaseFn* truth = nullptr) {
  if (samples.is_uniform()) {
    const Signal scattered = restrict_to(samples, all_samples(samples.size()));
    return decompose_sparse(scattered, theta0, opts, truth);
  }
  const std::size_t n_f = samples.samples().parent_size();
  if (theta0.size() != n_f) fail(ErrorKind::invalid_argument, "initial phase and sample parent grid differ");
  if (truth && truth->size() != n_f) fail(ErrorKind::invalid_argument, "reference phase grid differs");
  if (samples.size() < 2 * opts.solver.M0 + 2)
    fail(ErrorKind::invalid_argument, "need at least 2*M0+2 samples");
  if (opts.solver.M0 >= n_f / 2) fail(ErrorKind::invalid_argument, "M0 must be below N_f/2");
  if (!(opts.bp_tol >= 0.0) || !(opts.noise_sigma >= 0.0))
    fail(ErrorKind::invalid_argument, "basis-pursuit tolerance and noise level must be nonnegative");
  const double l0 = theta0.cycle_count();
  if (!(l0 >= 1.0)) fail(ErrorKind::invalid_phase, "initial phase must complete at least one cycle");
  if (theta0.min_derivative() < 0.0) fail(ErrorKind::invalid_phase, "initial phase is not monotone");
  const std::size_t n_b = opts.n_b.value_or(default_basis_size(l0, n_f));
  if (n_b < 2 || n_b % 2 != 0 || n_b > n_f) fail(ErrorKind::invalid_argument, "N_b must be even and in [2, N_f]");

  SolverOptions solver = opts.solver;
  if (!solver.eps0) solver.eps0 = kSparseEps0Scale * std::sqrt(static_cast<double>(n_f));
  detail::SparseAnalyser analyse{samples, opts, n_b, std::nullopt};
  return detail::iterate_phase(
      samples.values(), samples.samples().indices(), theta0, solver, truth,
      [&](const PhaseFn& theta) { return analyse(theta, false); },
      [&](const PhaseFn& theta) { return analyse(theta, true); });
}

/// ||θ - θ_ref - 2πm||_∞ / ||θ_ref||_∞ with the integer m that best aligns the two.
inline double relative_phase_error(const PhaseFn& theta, const PhaseFn& reference) {
  if (theta.size() != reference.size()) fail(ErrorKind::invalid_argument, "phases live on different grids");
  double mean_shift = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j) mean_shift += theta.values()[j] - reference.values()[j];
  mean_shift /= static_cast<double>(theta.size());
  const double shift = kTwoPi * std::round(mean_shift / kTwoPi);
  double err = 0.0;
  for (std::size_t j = 0; j < theta.size(); ++j)
    err = std::max(err, std::abs(theta.values()[j] - reference.values()[j] - shift));
  return err / max_abs(reference.values());
}

inline constexpr std::size_t kSparseGridSize = 4096;

/// How sparse trials pick θ0: the linear phase with the examples' nominal
/// cycle count, or the linear phase at the samples' dominant wavenumber.
enum class InitialPhase { nominal, periodogram };

inline PhaseFn sparse_example_initial_phase(const Signal& samples, InitialPhase mode) {
  const TimeGrid grid = samples.is_uniform() ? samples.grid() : samples.samples().parent_grid();
  if (mode == InitialPhase::nominal) return PhaseFn::linear(grid, 100.0);
  return default_initial_phase(samples);
}

struct SparseProblem {
  Signal samples;
  GroundTruth truth;
};

/// Seeded subsample of example 2 or 3 on an n_f-point grid. The seed drives
/// the sample draw and, for example 3, a decorrelated noise stream.
inline SparseProblem make_sparse_problem(int example_id, std::size_t n_s, std::uint64_t seed,
                                         std::size_t n_f = kSparseGridSize) {
  if (example_id != 2 && example_id != 3) fail(ErrorKind::invalid_argument, "sparse trials need example 2 or 3");
  const TimeGrid grid(n_f);
  auto [full, truth] = gen_example_signal(example_id, grid, seed ^ 0x9e3779b97f4a7c15ULL);
  return {restrict_to(full, subsample_random(grid, n_s, seed)), std::move(truth)};
}

/// Options for a sparse example: the example's noise level feeds the data-fit
/// bound unless the caller set one.
inline SparseOptions options_for(const SparseProblem& problem, SparseOptions base) {
  if (problem.truth.noise_sigma > 0.0 && base.noise_sigma == 0.0) base.noise_sigma = problem.truth.noise_sigma;
  return base;
}

struct TrialOutcome {
  std::uint64_t seed = 0;
  double phase_error = INFINITY;
  bool success = false;
  bool converged = false;
  double initial_cycles = 0.0;
  std::optional<std::string> error;
};

inline TrialOutcome run_sparse_trial(int example_id, std::size_t n_s, std::uint64_t seed, double threshold,
                                     const SparseOptions& base = {}, InitialPhase init = InitialPhase::nominal,
                                     std::size_t n_f = kSparseGridSize) {
  const SparseProblem problem = make_sparse_problem(example_id, n_s, seed, n_f);
  TrialOutcome out;
  out.seed = seed;
  try {
    const PhaseFn theta0 = sparse_example_initial_phase(problem.samples, init);
    out.initial_cycles = theta0.cycle_count();
    const Decomposition d = decompose_sparse(problem.samples, theta0, options_for(problem, base));
    out.converged = d.converged;
    out.phase_error = relative_phase_error(d.phase, problem.truth.phase);
    out.success = out.phase_error <= threshold;
  } catch (const Error& e) {
    out.error = e.what();
  }
  return out;
}

/// Trials seed0 .. seed0+trials-1 spread over `threads` workers. Each trial
/// writes its own slot, so the outcome does not depend on the thread count.
inline std::vector<TrialOutcome> run_sparse_trials(int example_id, std::size_t n_s, std::size_t trials,
                                                   std::uint64_t seed0, double threshold,
                                                   const SparseOptions& base = {},
                                                   InitialPhase init = InitialPhase::nominal, std::size_t threads = 1,
                                                   std::size_t n_f = kSparseGridSize) {
  if (trials < 1) fail(ErrorKind::invalid_argument, "trials must be at least 1");
  if (threads < 1) fail(ErrorKind::invalid_argument, "threads must be at least 1");
  std::vector<TrialOutcome> out(trials);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < trials; i = next++)
      out[i] = run_sparse_trial(example_id, n_s, seed0 + i, threshold, base, init, n_f);
  };
  std::vector<std::jthread> pool;
  for (std::size_t t = 1; t < std::min(threads, trials); ++t) pool.emplace_back(work);
  work();
  pool.clear();
  return out;
}

inline double success_rate(std::span<const TrialOutcome> outcomes) {
  if (outcomes.empty()) return 0.0;
  std::size_t hits = 0;
  for (const auto& o : outcomes) hits += o.success ? 1 : 0;
  return static_cast<double>(hits) / static_cast<double>(outcomes.size());
}

inline double success_trial(int example_id, std::size_t n_s, std::size_t trials, std::uint64_t seed0,
                            double threshold, const SparseOptions& base = {}, std::size_t threads = 1) {
  return success_rate(run_sparse_trials(example_id, n_s, trials, seed0, threshold, base, InitialPhase::nominal,
                                        threads));
}

}  // namespace dtfa
