#pragma once

// Spectral checks shared by the unit tests and the acceptance binary.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "dtfa/theta_spectral.hpp"
#include "support/generators.hpp"

namespace check {

using dtfa::cplx;

/// Complex exponential coefficient of a real trigonometric polynomial.
inline cplx poly_coeff(const gen::TrigPoly& p, long k) {
  if (k == 0) return p.mean;
  const auto j = static_cast<std::size_t>(std::abs(k));
  if (j > p.c.size()) return 0.0;
  const cplx c(p.c[j - 1] / 2, -p.d[j - 1] / 2);
  return k > 0 ? c : std::conj(c);
}

/// Draws f = f0 + a cos(2πLθ̄) - b sin(2πLθ̄) with f0, a, b band-limited below
/// L/2 and returns the largest gap between its θ̄-spectrum and the analytic
/// split f̂0(k) + (â(k-L) + â(k+L))/2 - i(b̂(k-L) - b̂(k+L))/2.
inline double spectral_identity_gap(gen::Engine& rng) {
  constexpr double pi = std::numbers::pi;
  const long l = static_cast<long>(gen::index(rng, 6, 30));
  const std::size_t band = gen::index(rng, 0, static_cast<std::size_t>(l - 1) / 2);
  const std::size_t n = 2 * static_cast<std::size_t>(4 * l);
  const auto f0 = gen::trig_poly(rng, band, 1.0, gen::uniform(rng, -1, 1));
  const auto a = gen::trig_poly(rng, band, 0.5, 3.0);
  const auto b = gen::trig_poly(rng, band, 0.5, gen::uniform(rng, -1, 1));
  std::vector<double> f(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double x = static_cast<double>(j) / static_cast<double>(n);
    f[j] = f0(x) + a(x) * std::cos(2 * pi * l * x) - b(x) * std::sin(2 * pi * l * x);
  }
  const auto s = dtfa::theta_fft(f);
  double gap = 0.0;
  for (long k = s.k_min; k <= s.k_max(); ++k) {
    const cplx expected = poly_coeff(f0, k) + 0.5 * (poly_coeff(a, k + l) + poly_coeff(a, k - l)) -
                          cplx(0.0, 0.5) * (poly_coeff(b, k + l) - poly_coeff(b, k - l));
    gap = std::max(gap, std::abs(s.at(k) - expected));
  }
  return gap;
}

struct EnvelopeCheck {
  double error_a = 0.0;
  double error_b = 0.0;
  double bound_a = 0.0;
  double bound_b = 0.0;
};

/// Extracts the envelopes of f0 + a1 cos θ at the exact phase and compares
/// the errors with spectral l1 bounds built from the θ̄-spectra of f0 and a1:
/// leakage of f̂0 into the carrier band, the 2L alias of â, and the tail of â
/// beyond the cutoff band (b = 0 here, so its alias and tail vanish).
inline EnvelopeCheck envelope_check(const dtfa::PhaseFn& theta, const std::vector<double>& f0v,
                                    const std::vector<double>& a1v) {
  using namespace dtfa;
  const std::size_t n = f0v.size();
  const long l = std::lround(theta.cycle_count());
  const long band = (l - 1) / 2;
  const auto bar = normalize_phase(theta).theta_bar;
  const long reach = static_cast<long>(n / 2) - 1;
  std::vector<double> f(n);
  for (std::size_t j = 0; j < n; ++j) f[j] = f0v[j] + a1v[j] * std::cos(theta.values()[j]);
  auto spec = theta_nudft(f, bar, -reach, reach);
  spec.phase_offset = theta.start();
  const auto [a_hat, b_hat] = extract_envelope_spectra(spec, static_cast<double>(l));
  const auto a = inverse_theta_fft(a_hat, bar.values());
  const auto b = inverse_theta_fft(b_hat, bar.values());
  EnvelopeCheck out;
  for (std::size_t j = 0; j < n; ++j) {
    out.error_a = std::max(out.error_a, std::abs(a[j] - a1v[j]));
    out.error_b = std::max(out.error_b, std::abs(b[j]));
  }
  const auto f0_hat = theta_nudft(f0v, bar, -reach, reach);
  const auto a1_hat = theta_nudft(a1v, bar, -reach, reach);
  double leak = 0.0, alias = 0.0, tail = 0.0;
  for (long k = -reach; k <= reach; ++k) {
    const long m = std::abs(k);
    if (m >= l - band && m <= l + band) leak += std::abs(f0_hat.at(k));
    if (m >= 2 * l - band && m <= 2 * l + band) alias += 0.5 * std::abs(a1_hat.at(k));
    if (m > band) tail += std::abs(a1_hat.at(k));
  }
  out.bound_a = leak + alias + tail;
  out.bound_b = leak + alias;
  return out;
}

}  // namespace check
