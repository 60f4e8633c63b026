#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "dtfa/fourier.hpp"

namespace dtfa {

/// Periodic cubic spline through samples y_j at x_j = j/n on the unit period.
///
/// The cyclic tridiagonal system for the knot curvatures is circulant on a
/// uniform grid, so it is diagonalized by the FFT.
class PeriodicCubicSpline {
 public:
  explicit PeriodicCubicSpline(std::span<const double> samples)
      : y_(samples.begin(), samples.end()), m_(samples.size()) {
    const std::size_t n = y_.size();
    if (n < 3) fail(ErrorKind::invalid_argument, "periodic spline needs at least 3 knots");
    h_ = 1.0 / static_cast<double>(n);
    std::vector<double> rhs(n);
    for (std::size_t j = 0; j < n; ++j) {
      const double prev = y_[(j + n - 1) % n], next = y_[(j + 1) % n];
      rhs[j] = 6.0 * (next - 2.0 * y_[j] + prev) / (h_ * h_);
    }
    auto c = fourier::forward(rhs);
    for (std::size_t i = 0; i < n; ++i)
      c[i] /= 4.0 + 2.0 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
    m_ = fourier::inverse_real(c);
  }

  std::size_t size() const noexcept { return y_.size(); }

  double operator()(double x) const {
    const auto [j, u] = locate(x);
    const std::size_t k = (j + 1) % y_.size();
    const double w = h_ - u;
    return (m_[j] * w * w * w + m_[k] * u * u * u) / (6.0 * h_) + (y_[j] - m_[j] * h_ * h_ / 6.0) * w / h_ +
           (y_[k] - m_[k] * h_ * h_ / 6.0) * u / h_;
  }

  double derivative(double x) const {
    const auto [j, u] = locate(x);
    const std::size_t k = (j + 1) % y_.size();
    const double w = h_ - u;
    return (m_[k] * u * u - m_[j] * w * w) / (2.0 * h_) + (y_[k] - y_[j]) / h_ - (m_[k] - m_[j]) * h_ / 6.0;
  }

  std::vector<double> operator()(std::span<const double> xs) const {
    std::vector<double> out(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) out[i] = (*this)(xs[i]);
    return out;
  }

 private:
  struct Cell {
    std::size_t index;
    double offset;
  };

  Cell locate(double x) const {
    const double period_pos = x - std::floor(x);
    const double scaled = period_pos / h_;
    auto j = static_cast<std::size_t>(std::floor(scaled));
    if (j >= y_.size()) j = y_.size() - 1;
    return {j, period_pos - static_cast<double>(j) * h_};
  }

  std::vector<double> y_;
  std::vector<double> m_;
  double h_ = 0.0;
};

}  // namespace dtfa
