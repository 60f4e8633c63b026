#pragma once

// Iterative recovery of f = a0 + a1 cos θ for well-resolved periodic signals:
// spectrum in the current phase coordinate, envelope extraction around the
// carrier, arctan phase correction confined to V_M0, monotone line search.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "dtfa/core.hpp"
#include "dtfa/fourier.hpp"
#include "dtfa/spline.hpp"
#include "dtfa/theta_spectral.hpp"

namespace dtfa {

enum class TransformMode { fft_interp, nudft };

struct SolverOptions {
  /// Band of the phase correction: Δθ' ∈ span{exp(i2πkt), |k| ≤ M0}.
  std::size_t M0 = 2;
  /// Stop when ||θ^{n+1} - θ^n||_2 < eps0; unset means 1e-8·sqrt(N).
  std::optional<double> eps0{};
  std::size_t max_iter = 200;
  TransformMode transform_mode = TransformMode::nudft;

  double eps0_for(std::size_t n) const {
    const double e = eps0.value_or(1e-8 * std::sqrt(static_cast<double>(n)));
    if (!(e > 0.0)) fail(ErrorKind::invalid_argument, "eps0 must be positive");
    return e;
  }
  void validate() const {
    if (max_iter < 1) fail(ErrorKind::invalid_argument, "max_iter must be at least 1");
    if (eps0 && !(*eps0 > 0.0)) fail(ErrorKind::invalid_argument, "eps0 must be positive");
  }
};

struct IterRecord {
  std::size_t iteration = 0;
  double beta = 1.0;
  /// ||θ^{n+1} - θ^n||_2 over the grid.
  double step_norm = 0.0;
  /// ||f - a0 - (a cos θ^n - b sin θ^n)||_2 for the model built at θ^n.
  double residual_norm = 0.0;
  /// L^n - round(L^n); nonzero means the carrier index was rounded.
  double carrier_fraction = 0.0;
  /// Only with ground truth: ||F((θ^{n+1} - θ)')||_1 and its ratio to 2πM0.
  std::optional<double> freq_error;
  std::optional<double> gamma;
};

struct IterTrace {
  std::vector<IterRecord> records;
  std::optional<double> initial_freq_error;
};

struct Decomposition {
  std::vector<double> a0;
  std::vector<double> a1;
  PhaseFn phase;
  std::vector<double> imf;
  std::vector<double> residual;
  IterTrace trace;
  bool converged = false;
};

inline double norm2(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

inline double max_abs(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

/// ||F((θ - θ_ref)')||_1: l1 norm of the time-domain Fourier coefficients of
/// the instantaneous-frequency error.
inline double l1_freq_error(const PhaseFn& theta, const PhaseFn& reference) {
  if (theta.size() != reference.size()) fail(ErrorKind::invalid_argument, "phases live on different grids");
  std::vector<double> d(theta.size());
  for (std::size_t j = 0; j < d.size(); ++j) d[j] = theta.derivative()[j] - reference.derivative()[j];
  double sum = 0.0;
  for (const auto& c : fourier::forward(d)) sum += std::abs(c);
  return sum;
}

inline constexpr int kBetaLatticeSteps = 100;

/// Largest β ∈ {k/100 : k = 0..100} with θ' + βΔθ' ≥ 0 at every grid point.
inline double beta_max_monotone(std::span<const double> theta_prime, std::span<const double> delta_prime) {
  if (theta_prime.size() != delta_prime.size())
    fail(ErrorKind::invalid_argument, "derivative vectors differ in length");
  auto admissible = [&](int k) {
    const double beta = static_cast<double>(k) / kBetaLatticeSteps;
    for (std::size_t j = 0; j < theta_prime.size(); ++j)
      if (theta_prime[j] + beta * delta_prime[j] < 0.0) return false;
    return true;
  };
  double limit = 1.0;
  for (std::size_t j = 0; j < theta_prime.size(); ++j)
    if (delta_prime[j] < 0.0) limit = std::min(limit, theta_prime[j] / -delta_prime[j]);
  int k = std::clamp(static_cast<int>(std::floor(limit * kBetaLatticeSteps)), 0, kBetaLatticeSteps);
  // The continuous bound only seeds the search; the lattice test decides.
  while (k < kBetaLatticeSteps && admissible(k + 1)) ++k;
  while (k > 0 && !admissible(k)) --k;
  return static_cast<double>(k) / kBetaLatticeSteps;
}

inline constexpr double kEnvelopeFloor = 1e-6;

struct PhaseUpdate {
  PhaseFn next;
  double beta;
  std::vector<double> delta_theta;
  std::vector<double> delta_theta_prime;
};

/// d/dt atan2(b, a) = (a b' - b a') / (a² + b²), with spectral derivatives.
inline std::vector<double> arctan_derivative(const EnvelopePair& env) {
  const std::size_t n = env.a.size();
  double peak = 0.0, low = INFINITY;
  for (std::size_t j = 0; j < n; ++j) {
    const double r2 = env.a[j] * env.a[j] + env.b[j] * env.b[j];
    peak = std::max(peak, r2);
    low = std::min(low, r2);
  }
  if (!(low >= kEnvelopeFloor * peak) || peak == 0.0)
    fail(ErrorKind::degenerate_envelope, "envelope a^2 + b^2 vanishes relative to its peak");
  const auto da = fourier::derivative(env.a);
  const auto db = fourier::derivative(env.b);
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = (env.a[j] * db[j] - env.b[j] * da[j]) / (env.a[j] * env.a[j] + env.b[j] * env.b[j]);
  return out;
}

inline PhaseUpdate phase_update(const PhaseFn& theta, const EnvelopePair& env, std::size_t max_mode) {
  const std::size_t n = theta.size();
  if (env.a.size() != n || env.b.size() != n)
    fail(ErrorKind::invalid_argument, "envelope and phase grids differ");
  const auto psi_prime = arctan_derivative(env);
  auto delta_prime = project_low_modes(psi_prime, max_mode);
  auto delta = fourier::integral(delta_prime);
  const double beta = beta_max_monotone(theta.derivative(), delta_prime);
  std::vector<double> v(n), d(n);
  for (std::size_t j = 0; j < n; ++j) {
    v[j] = theta.values()[j] + beta * delta[j];
    d[j] = theta.derivative()[j] + beta * delta_prime[j];
  }
  return {PhaseFn(std::move(v), std::move(d)), beta, std::move(delta), std::move(delta_prime)};
}

/// Pointwise atan2(b, a), unwrapped along the grid starting from the principal
/// branch at t = 0.
inline std::vector<double> unwrapped_angle(const EnvelopePair& env) {
  std::vector<double> psi(env.a.size());
  for (std::size_t j = 0; j < psi.size(); ++j) {
    double x = std::atan2(env.b[j], env.a[j]);
    if (j > 0) x += kTwoPi * std::round((psi[j - 1] - x) / kTwoPi);
    psi[j] = x;
  }
  return psi;
}

/// Envelope pair and local mean on the time grid, built from the signal's
/// spectrum in the coordinate of `theta`.
struct PhaseAnalysis {
  EnvelopePair env;
  std::vector<double> mean;
  double cycles = 0.0;
};

inline PhaseAnalysis analyse_well_resolved(const Signal& signal, const PhaseFn& theta, TransformMode mode) {
  const auto [theta_bar, cycles] = normalize_phase(theta);
  const long carrier = carrier_index(cycles);
  if (carrier < 1) fail(ErrorKind::invalid_phase, "phase completes less than one cycle");
  const auto times_bar = theta_bar.values();

  ThetaSpectrum spectrum;
  if (mode == TransformMode::fft_interp) {
    spectrum = theta_fft(interp_to_theta_grid(signal, theta));
  } else {
    const long reach = carrier + detail::band_limit(carrier) + 1;
    spectrum = theta_nudft(signal.values(), theta_bar, -reach, reach);
  }
  spectrum.cycle_count = cycles;
  spectrum.phase_offset = theta.start();
  const auto [a_hat, b_hat] = extract_envelope_spectra(spectrum, cycles);
  const auto mean_hat = low_band(spectrum, cycles);

  PhaseAnalysis out;
  out.cycles = cycles;
  if (mode == TransformMode::fft_interp) {
    // Values on the uniform θ̄ mesh, then spline back to the time grid.
    const auto mesh = uniform_unit_mesh(signal.size());
    auto back = [&](const ThetaSpectrum& s) {
      return PeriodicCubicSpline(inverse_theta_fft(s, mesh))(times_bar);
    };
    out.env = {back(a_hat), back(b_hat)};
    out.mean = back(mean_hat);
  } else {
    out.env = {inverse_theta_fft(a_hat, times_bar), inverse_theta_fft(b_hat, times_bar)};
    out.mean = inverse_theta_fft(mean_hat, times_bar);
  }
  return out;
}

namespace detail {

/// Maps entry j of the data vector to its grid node; empty rows mean the data
/// covers the whole grid.
inline std::size_t grid_node(std::span<const std::size_t> rows, std::size_t j) {
  return rows.empty() ? j : rows[j];
}

inline double model_residual_norm(std::span<const double> f, std::span<const std::size_t> rows,
                                  const PhaseAnalysis& an, const PhaseFn& theta) {
  double s = 0.0;
  for (std::size_t j = 0; j < f.size(); ++j) {
    const std::size_t i = grid_node(rows, j);
    const double th = theta.values()[i];
    const double r = f[j] - an.mean[i] - (an.env.a[i] * std::cos(th) - an.env.b[i] * std::sin(th));
    s += r * r;
  }
  return std::sqrt(s);
}

inline double envelope_peak(const EnvelopePair& env) {
  double peak = 0.0;
  for (std::size_t j = 0; j < env.a.size(); ++j) peak = std::max(peak, std::hypot(env.a[j], env.b[j]));
  return peak;
}

inline bool envelope_negligible(const EnvelopePair& env, double signal_scale) {
  return envelope_peak(env) <= 1e-10 * signal_scale;
}

/// Polar form of the final envelope pair: a1 = |a + ib| and θ corrected by the
/// remaining arctan so that the envelope is real and positive. The correction
/// goes through the monotone line search; it is taken in full whenever the
/// iteration converged. The residual is reported at the data points.
inline Decomposition finish(std::span<const double> f, std::span<const std::size_t> rows, const PhaseFn& theta,
                            const PhaseAnalysis& an, IterTrace trace, bool converged, bool no_oscillation) {
  const std::size_t n = theta.size();
  Decomposition out{an.mean, std::vector<double>(n, 0.0), theta, std::vector<double>(n, 0.0),
                    std::vector<double>(f.size(), 0.0), std::move(trace), converged};
  if (!no_oscillation) {
    const auto psi = unwrapped_angle(an.env);
    const auto psi_prime = arctan_derivative(an.env);
    const double beta = beta_max_monotone(theta.derivative(), psi_prime);
    std::vector<double> v(n), d(n);
    for (std::size_t j = 0; j < n; ++j) {
      out.a1[j] = std::hypot(an.env.a[j], an.env.b[j]);
      v[j] = theta.values()[j] + beta * psi[j];
      d[j] = theta.derivative()[j] + beta * psi_prime[j];
      out.imf[j] = out.a1[j] * std::cos(theta.values()[j] + psi[j]);
    }
    out.phase = PhaseFn(std::move(v), std::move(d));
  }
  for (std::size_t j = 0; j < f.size(); ++j) {
    const std::size_t i = grid_node(rows, j);
    out.residual[j] = f[j] - out.a0[i] - out.imf[i];
  }
  return out;
}

/// Below this fraction of max|f|, the envelope seen at the initial phase is
/// treated as leakage from the mean: the signal has no IMF at that scale.
inline constexpr double kOscillationFloor = 0.05;

/// `analyse` drives the iteration; `final_analyse` builds the reported
/// envelopes at the last phase.
template <typename Analyse, typename FinalAnalyse>
Decomposition iterate_phase(std::span<const double> f, std::span<const std::size_t> rows, const PhaseFn& theta0,
                            const SolverOptions& opts, const PhaseFn* truth, Analyse&& analyse,
                            FinalAnalyse&& final_analyse) {
  opts.validate();
  const double eps0 = opts.eps0_for(theta0.size());
  const double scale = max_abs(f);
  IterTrace trace;
  if (truth) trace.initial_freq_error = l1_freq_error(theta0, *truth);

  if (scale == 0.0) {
    const std::size_t n = theta0.size();
    PhaseAnalysis zero{{std::vector<double>(n, 0.0), std::vector<double>(n, 0.0)}, std::vector<double>(n, 0.0),
                       theta0.cycle_count()};
    return finish(f, rows, theta0, zero, std::move(trace), true, true);
  }

  PhaseFn theta = theta0;
  std::optional<PhaseFn> best;
  double best_residual = INFINITY;
  bool converged = false;

  for (std::size_t it = 0; it < opts.max_iter; ++it) {
    const PhaseAnalysis an = analyse(theta);
    const double floor = it == 0 ? kOscillationFloor : 1e-10;
    if (envelope_peak(an.env) <= floor * scale) return finish(f, rows, theta, an, std::move(trace), true, true);

    IterRecord rec;
    rec.iteration = it;
    rec.residual_norm = model_residual_norm(f, rows, an, theta);
    rec.carrier_fraction = an.cycles - static_cast<double>(carrier_index(an.cycles));
    if (rec.residual_norm < best_residual) {
      best_residual = rec.residual_norm;
      best = theta;
    }

    auto upd = phase_update(theta, an.env, opts.M0);
    std::vector<double> step(theta.size());
    for (std::size_t j = 0; j < step.size(); ++j) step[j] = upd.next.values()[j] - theta.values()[j];
    rec.beta = upd.beta;
    rec.step_norm = norm2(step);
    theta = std::move(upd.next);
    if (truth) {
      rec.freq_error = l1_freq_error(theta, *truth);
      rec.gamma = *rec.freq_error / (kTwoPi * static_cast<double>(std::max<std::size_t>(opts.M0, 1)));
    }
    trace.records.push_back(rec);
    if (rec.step_norm < eps0) {
      converged = true;
      break;
    }
  }
  if (!converged && best) theta = *best;
  const PhaseAnalysis final_an = final_analyse(theta);
  return finish(f, rows, theta, final_an, std::move(trace), converged,
                envelope_negligible(final_an.env, scale));
}

}  // namespace detail

/// Full well-resolved loop. `truth`, when given, only feeds the contraction
/// diagnostics in the trace.
inline Decomposition decompose_well_resolved(const Signal& signal, const PhaseFn& theta0,
                                             const SolverOptions& opts, const PhaseFn* truth = nullptr) {
  const std::size_t n = signal.grid().size();
  if (theta0.size() != n) fail(ErrorKind::invalid_argument, "initial phase and signal grids differ");
  if (truth && truth->size() != n) fail(ErrorKind::invalid_argument, "reference phase grid differs");
  if (opts.M0 >= n / 2) fail(ErrorKind::invalid_argument, "M0 must be below N/2");
  const double l0 = theta0.cycle_count();
  if (!(l0 >= 1.0)) fail(ErrorKind::invalid_phase, "initial phase must complete at least one cycle");
  if (theta0.min_derivative() < 0.0) fail(ErrorKind::invalid_phase, "initial phase is not monotone");
  auto analyse = [&](const PhaseFn& theta) { return analyse_well_resolved(signal, theta, opts.transform_mode); };
  return detail::iterate_phase(signal.values(), {}, theta0, opts, truth, analyse, analyse);
}

/// Sequential extraction: each stage decomposes the previous stage's mean.
inline std::vector<Decomposition> peel_imfs(const Signal& signal, std::span<const PhaseFn> initial_phases,
                                            const SolverOptions& opts) {
  if (initial_phases.empty()) fail(ErrorKind::invalid_argument, "need at least one initial phase");
  const double eps0 = opts.eps0_for(signal.size());
  std::vector<Decomposition> out;
  Signal current = signal;
  for (const PhaseFn& theta0 : initial_phases) {
    out.push_back(decompose_well_resolved(current, theta0, opts));
    if (norm2(out.back().a0) <= eps0) break;
    current = Signal(signal.grid(), out.back().a0);
  }
  return out;
}

/// Wavenumber k ≥ 1 with the largest |Fourier coefficient| of the signal;
/// scattered samples use the unit-weight sum over sample times.
inline long dominant_cycle_count(const Signal& signal) {
  std::vector<double> v(signal.values().begin(), signal.values().end());
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  for (double& x : v) x -= mean;
  const std::size_t parent = signal.is_uniform() ? signal.size() : signal.samples().parent_size();
  const long top = static_cast<long>(parent / 2) - 1;
  if (top < 1) fail(ErrorKind::invalid_argument, "signal too short to locate a carrier");
  const auto spec = theta_nudft(v, signal.times(), 1, top);
  long best = 1;
  for (long k = 1; k <= top; ++k)
    if (std::abs(spec.at(k)) > std::abs(spec.at(best))) best = k;
  return best;
}

/// θ0 = 2π L̂ t with L̂ the dominant wavenumber of the signal.
inline PhaseFn default_initial_phase(const Signal& signal) {
  const TimeGrid grid = signal.is_uniform() ? signal.grid() : signal.samples().parent_grid();
  return PhaseFn::linear(grid, static_cast<double>(dominant_cycle_count(signal)));
}

}  // namespace dtfa
