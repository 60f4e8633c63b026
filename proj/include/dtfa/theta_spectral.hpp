#pragma once

// Spectral engine in the normalized phase coordinate θ̄ = (θ - θ(0)) / (2πL).
//
// A ThetaSpectrum holds Fourier coefficients c_k over a contiguous wavenumber
// range such that a function is represented as Σ_k c_k exp(i2πk θ̄).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "dtfa/core.hpp"
#include "dtfa/fourier.hpp"
#include "dtfa/spline.hpp"

namespace dtfa {

using cplx = std::complex<double>;

struct ThetaSpectrum {
  long k_min = 0;
  std::vector<cplx> coeffs;
  /// Cycle count L of the phase whose coordinate this spectrum lives in.
  double cycle_count = 0.0;
  /// θ(0) of that phase; the carrier is cos(2πL θ̄ + phase_offset).
  double phase_offset = 0.0;

  long k_max() const noexcept { return k_min + static_cast<long>(coeffs.size()) - 1; }
  bool contains(long k) const noexcept { return k >= k_min && k <= k_max(); }
  cplx at(long k) const noexcept { return contains(k) ? coeffs[static_cast<std::size_t>(k - k_min)] : cplx{}; }
  cplx& operator[](long k) { return coeffs[static_cast<std::size_t>(k - k_min)]; }

  static ThetaSpectrum zeros(long k_min, long k_max) {
    ThetaSpectrum s;
    s.k_min = k_min;
    s.coeffs.assign(static_cast<std::size_t>(std::max(0L, k_max - k_min + 1)), cplx{});
    return s;
  }
};

struct EnvelopePair {
  std::vector<double> a;
  std::vector<double> b;
};

struct NormalizedPhase {
  PhaseFn theta_bar;
  double cycles;
};

namespace detail {

/// exp(i2π y) with the argument reduced to [-1/2, 1/2] first.
inline cplx unit_phasor(double y) {
  const double r = y - std::round(y);
  return std::polar(1.0, kTwoPi * r);
}

/// Calls sink(k, exp(i·sign·2πkx)) for k = k_min..k_max. Runs a multiplicative
/// recurrence, re-seeded every 64 steps to bound drift.
template <typename Sink>
void for_each_phasor(double x, long k_min, long k_max, double sign, Sink&& sink) {
  const cplx step = unit_phasor(sign * x);
  cplx z;
  for (long k = k_min; k <= k_max; ++k) {
    if ((k - k_min) % 64 == 0) z = unit_phasor(sign * static_cast<double>(k) * x);
    sink(k, z);
    z *= step;
  }
}

}  // namespace detail

/// θ̄ = (θ - θ(0)) / (2πL), L = (θ(1) - θ(0)) / 2π.
inline NormalizedPhase normalize_phase(const PhaseFn& theta) {
  const double cycles = theta.cycle_count();
  if (!(cycles > 0.0)) fail(ErrorKind::invalid_phase, "phase must advance: cycle count is not positive");
  if (theta.min_derivative() < 0.0) fail(ErrorKind::invalid_phase, "phase derivative is negative");
  const double scale = 1.0 / (kTwoPi * cycles);
  const double start = theta.start();
  std::vector<double> v(theta.size()), d(theta.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    v[j] = (theta.values()[j] - start) * scale;
    d[j] = theta.derivative()[j] * scale;
  }
  for (std::size_t j = 1; j < v.size(); ++j)
    if (v[j] < v[j - 1]) fail(ErrorKind::invalid_phase, "phase values are not monotone");
  return {PhaseFn(std::move(v), std::move(d)), cycles};
}

/// Continuous evaluation of a grid phase: the periodic part θ - θ(0) - 2πLt and
/// θ' are trigonometric interpolants of their samples.
class PhaseInterpolant {
 public:
  explicit PhaseInterpolant(const PhaseFn& theta)
      : n_(theta.size()), start_(theta.start()), advance_(theta.total_advance()) {
    std::vector<double> periodic(n_);
    for (std::size_t j = 0; j < n_; ++j)
      periodic[j] = theta.values()[j] - start_ - advance_ * static_cast<double>(j) / static_cast<double>(n_);
    keep_modes(fourier::forward(periodic), periodic_);
    keep_modes(fourier::forward(theta.derivative()), slope_);
  }

  double value(double t) const { return start_ + advance_ * t + eval(periodic_, t); }
  double derivative(double t) const { return eval(slope_, t); }

  /// θ̄(t).
  double normalized(double t) const { return (value(t) - start_) / advance_; }

  /// Solves θ̄(t) = s for t by bracketed Newton iteration.
  double normalized_inverse(double s) const {
    double bound = 0.0;
    for (const auto& [k, c] : periodic_) bound += 2.0 * std::abs(c);
    bound /= std::abs(advance_);
    double lo = s - bound - 1e-12, hi = s + bound + 1e-12;
    double t = s;
    for (int it = 0; it < 100; ++it) {
      const double g = normalized(t) - s;
      if (g > 0) hi = std::min(hi, t); else lo = std::max(lo, t);
      const double dg = derivative(t) / advance_;
      double next = dg > 0 ? t - g / dg : 0.5 * (lo + hi);
      if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
      if (std::abs(next - t) <= 1e-15 * std::max(1.0, std::abs(t))) return next;
      t = next;
    }
    return t;
  }

 private:
  using Mode = std::pair<long, cplx>;

  void keep_modes(const std::vector<cplx>& c, std::vector<Mode>& out) const {
    double peak = 0.0;
    for (const auto& x : c) peak = std::max(peak, std::abs(x));
    for (std::size_t i = 0; i < c.size(); ++i) {
      if (std::abs(c[i]) <= 1e-15 * peak) continue;
      const long k = fourier::wavenumber(i, n_);
      // Split the Nyquist mode symmetrically so the interpolant stays real.
      if (n_ % 2 == 0 && i == n_ / 2) {
        out.emplace_back(k, 0.5 * c[i]);
        out.emplace_back(-k, 0.5 * c[i]);
      } else {
        out.emplace_back(k, c[i]);
      }
    }
  }

  static double eval(const std::vector<Mode>& modes, double t) {
    double acc = 0.0;
    for (const auto& [k, c] : modes) acc += (c * detail::unit_phasor(static_cast<double>(k) * t)).real();
    return acc;
  }

  std::size_t n_;
  double start_;
  double advance_;
  std::vector<Mode> periodic_;
  std::vector<Mode> slope_;
};

/// Samples of a uniform-grid signal at the N times where θ̄ = j/N, by periodic
/// cubic spline interpolation.
inline std::vector<double> interp_to_theta_grid(const Signal& signal, const PhaseFn& theta) {
  const std::size_t n = signal.grid().size();
  if (theta.size() != n) fail(ErrorKind::invalid_argument, "phase and signal grids differ");
  if (theta.min_derivative() <= 0.0) fail(ErrorKind::invalid_phase, "phase derivative must be positive");
  if (!(theta.cycle_count() > 0.0)) fail(ErrorKind::invalid_phase, "phase must advance");
  const PhaseInterpolant phase(theta);
  const PeriodicCubicSpline spline(signal.values());
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = spline(phase.normalized_inverse(static_cast<double>(j) / static_cast<double>(n)));
  return out;
}

/// c(ω) = (1/N) Σ_j v_j exp(-i2πω j/N) for ω = -N/2+1 .. N/2.
inline ThetaSpectrum theta_fft(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2 || n % 2 != 0) fail(ErrorKind::invalid_argument, "theta_fft needs an even number of samples");
  const auto c = fourier::forward(values);
  const long half = static_cast<long>(n / 2);
  auto s = ThetaSpectrum::zeros(-half + 1, half);
  for (long k = -half + 1; k <= half; ++k)
    s[k] = c[static_cast<std::size_t>((k + static_cast<long>(n)) % static_cast<long>(n))];
  return s;
}

namespace detail {
inline void check_unit_range(std::span<const double> theta_bar) {
  for (double x : theta_bar)
    if (!(x >= -1e-9 && x <= 1.0 + 1e-9))
      fail(ErrorKind::invalid_phase, "normalized phase value outside [0,1]");
}
}  // namespace detail

/// Direct quadrature c(k) = Σ_j (θ̄'(t_j)/N) f_j exp(-i2πk θ̄(t_j)) of the
/// θ̄-coordinate Fourier integral from samples on a uniform time grid.
inline ThetaSpectrum theta_nudft(std::span<const double> values, const PhaseFn& theta_bar, long k_min,
                                 long k_max) {
  const std::size_t n = values.size();
  if (theta_bar.size() != n) fail(ErrorKind::invalid_argument, "phase and samples differ in length");
  detail::check_unit_range(theta_bar.values());
  auto s = ThetaSpectrum::zeros(k_min, k_max);
  const double inv_n = 1.0 / static_cast<double>(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double w = theta_bar.derivative()[j] * inv_n * values[j];
    detail::for_each_phasor(theta_bar.values()[j], k_min, k_max, -1.0, [&](long k, cplx z) { s[k] += w * z; });
  }
  return s;
}

/// Unit-weight variant c(k) = Σ_j f_j exp(-i2πk θ̄_j), i.e. A^H f for the
/// unweighted sensing matrix at the points θ̄_j.
inline ThetaSpectrum theta_nudft(std::span<const double> values, std::span<const double> theta_bar_points,
                                 long k_min, long k_max) {
  if (theta_bar_points.size() != values.size())
    fail(ErrorKind::invalid_argument, "phase and samples differ in length");
  detail::check_unit_range(theta_bar_points);
  auto s = ThetaSpectrum::zeros(k_min, k_max);
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double w = values[j];
    detail::for_each_phasor(theta_bar_points[j], k_min, k_max, -1.0, [&](long k, cplx z) { s[k] += w * z; });
  }
  return s;
}

/// Indicator of the open interval (-1/2, 1/2).
inline int cutoff_chi(double omega_over_l) { return (omega_over_l > -0.5 && omega_over_l < 0.5) ? 1 : 0; }

/// Integer carrier index used for spectral shifts: L rounded to nearest.
inline long carrier_index(double cycles) { return std::lround(cycles); }

namespace detail {
/// Largest |ω| with χ(ω/L) = 1 for integer carrier L.
inline long band_limit(long carrier) { return (carrier - 1) / 2; }
}  // namespace detail

/// Low band of the spectrum selected by χ(ω/L): the local-mean part.
inline ThetaSpectrum low_band(const ThetaSpectrum& spectrum, double cycles) {
  const long carrier = carrier_index(cycles);
  const long band = detail::band_limit(carrier);
  auto out = ThetaSpectrum::zeros(-band, band);
  for (long w = -band; w <= band; ++w)
    if (cutoff_chi(static_cast<double>(w) / static_cast<double>(carrier))) out[w] = spectrum.at(w);
  out.cycle_count = cycles;
  out.phase_offset = spectrum.phase_offset;
  return out;
}

/// Envelope spectra around the carrier ±L:
///   â(ω) = (r̂(ω+L) + r̂(ω-L)) χ(ω/L),  b̂(ω) = -i (r̂(ω+L) - r̂(ω-L)) χ(ω/L),
/// then rotated by the carrier offset so that a + ib = a1·exp(iΔθ) for a signal
/// a1 cos(θ^n + Δθ) analysed in the θ^n coordinate. Non-integer L is rounded.
inline std::pair<ThetaSpectrum, ThetaSpectrum> extract_envelope_spectra(const ThetaSpectrum& spectrum,
                                                                        double cycles) {
  if (!(cycles >= 1.0)) fail(ErrorKind::invalid_argument, "cycle count must be at least 1");
  const long carrier = carrier_index(cycles);
  const long band = detail::band_limit(carrier);
  auto a = ThetaSpectrum::zeros(-band, band);
  auto b = ThetaSpectrum::zeros(-band, band);
  const double c = std::cos(spectrum.phase_offset), s = std::sin(spectrum.phase_offset);
  for (long w = -band; w <= band; ++w) {
    if (!cutoff_chi(static_cast<double>(w) / static_cast<double>(carrier))) continue;
    const cplx up = spectrum.at(w + carrier), down = spectrum.at(w - carrier);
    const cplx af = up + down;
    const cplx bf = cplx(0.0, -1.0) * (up - down);
    a[w] = c * af + s * bf;
    b[w] = c * bf - s * af;
  }
  for (auto* x : {&a, &b}) {
    x->cycle_count = cycles;
    x->phase_offset = 0.0;
  }
  return {std::move(a), std::move(b)};
}

/// out_j = Re Σ_ω c(ω) exp(i2πω θ̄_j) at arbitrary points.
inline std::vector<double> inverse_theta_fft(const ThetaSpectrum& spectrum, std::span<const double> points) {
  std::vector<double> out(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    double acc = 0.0;
    detail::for_each_phasor(points[j], spectrum.k_min, spectrum.k_max(), 1.0,
                            [&](long k, cplx z) { acc += (spectrum.at(k) * z).real(); });
    out[j] = acc;
  }
  return out;
}

/// Uniform θ̄ mesh j/N.
inline std::vector<double> uniform_unit_mesh(std::size_t n) { return TimeGrid(n).points(); }

/// L²-orthogonal projection onto span{exp(i2πkt) : |k| ≤ M0}.
inline std::vector<double> project_low_modes(std::span<const double> values, std::size_t max_mode) {
  const std::size_t n = values.size();
  if (max_mode >= n / 2)
    fail(ErrorKind::invalid_argument, "projection band M0 must be below N/2");
  auto c = fourier::forward(values);
  for (std::size_t i = 0; i < n; ++i)
    if (static_cast<std::size_t>(std::abs(fourier::wavenumber(i, n))) > max_mode) c[i] = 0.0;
  return fourier::inverse_real(c);
}

}  // namespace dtfa
