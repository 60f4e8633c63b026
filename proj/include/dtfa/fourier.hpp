#pragma once

// Periodic FFT helpers on the unit interval. Coefficients are normalized so
// that v_j = Σ_k c_k exp(i2πk j/N), i.e. c_k = (1/N) Σ_j v_j exp(-i2πk j/N),
// and stored in standard FFT order (index k ↔ wavenumber k for k ≤ N/2,
// k - N above).

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

#include <unsupported/Eigen/FFT>

#include "dtfa/core.hpp"

namespace dtfa::fourier {

using cplx = std::complex<double>;

namespace detail {
inline Eigen::FFT<double>& engine() {
  thread_local Eigen::FFT<double> fft;
  return fft;
}
}  // namespace detail

/// Signed wavenumber of FFT slot `index` on an N-point grid.
inline long wavenumber(std::size_t index, std::size_t n) {
  const auto k = static_cast<long>(index);
  return index <= n / 2 ? k : k - static_cast<long>(n);
}

inline std::vector<cplx> forward(std::span<const double> values) {
  std::vector<cplx> in(values.begin(), values.end()), out;
  detail::engine().fwd(out, in);
  const double scale = 1.0 / static_cast<double>(values.size());
  for (auto& c : out) c *= scale;
  return out;
}

inline std::vector<cplx> forward(std::span<const cplx> values) {
  std::vector<cplx> in(values.begin(), values.end()), out;
  detail::engine().fwd(out, in);
  const double scale = 1.0 / static_cast<double>(values.size());
  for (auto& c : out) c *= scale;
  return out;
}

/// Inverse of `forward`, complex output.
inline std::vector<cplx> inverse(std::span<const cplx> coeffs) {
  std::vector<cplx> in(coeffs.begin(), coeffs.end()), out;
  auto& fft = detail::engine();
  fft.SetFlag(Eigen::FFT<double>::Unscaled);
  fft.inv(out, in);
  fft.ClearFlag(Eigen::FFT<double>::Unscaled);
  return out;
}

inline std::vector<double> inverse_real(std::span<const cplx> coeffs) {
  auto z = inverse(coeffs);
  std::vector<double> v(z.size());
  for (std::size_t j = 0; j < z.size(); ++j) v[j] = z[j].real();
  return v;
}

/// d/dt of a periodic function sampled on [0,1); the Nyquist mode is dropped.
inline std::vector<double> derivative(std::span<const double> values) {
  const std::size_t n = values.size();
  auto c = forward(values);
  for (std::size_t i = 0; i < n; ++i) {
    const long k = wavenumber(i, n);
    c[i] = (n % 2 == 0 && i == n / 2) ? cplx{} : c[i] * cplx(0.0, kTwoPi * static_cast<double>(k));
  }
  return inverse_real(c);
}

/// ∫_0^t g(s) ds on the grid for a periodic integrand g, including the linear
/// part contributed by the mean of g. The Nyquist mode is dropped.
inline std::vector<double> integral(std::span<const double> integrand) {
  const std::size_t n = integrand.size();
  auto c = forward(integrand);
  const double mean = c[0].real();
  c[0] = 0.0;
  if (n % 2 == 0) c[n / 2] = 0.0;
  for (std::size_t i = 1; i < n; ++i) {
    if (n % 2 == 0 && i == n / 2) continue;
    c[i] /= cplx(0.0, kTwoPi * static_cast<double>(wavenumber(i, n)));
  }
  auto periodic = inverse_real(c);
  const double at_zero = periodic[0];
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j)
    out[j] = mean * static_cast<double>(j) / static_cast<double>(n) + periodic[j] - at_zero;
  return out;
}

}  // namespace dtfa::fourier
