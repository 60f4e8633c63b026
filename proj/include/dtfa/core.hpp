#pragma once

// Domain types shared by every stage: the periodic sample grid on [0,1),
// scattered subsets of it, signals, and monotone phase functions.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <numeric>
#include <random>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <boost/random/normal_distribution.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "dtfa/error.hpp"

namespace dtfa {

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Uniform periodic grid t_j = j/n, j = 0..n-1.
class TimeGrid {
 public:
  explicit TimeGrid(std::size_t n) : n_(n) {
    if (n < 2) fail(ErrorKind::invalid_argument, "time grid needs at least 2 points, got " + std::to_string(n));
  }

  std::size_t size() const noexcept { return n_; }
  double spacing() const noexcept { return 1.0 / static_cast<double>(n_); }
  double at(std::size_t j) const noexcept { return static_cast<double>(j) / static_cast<double>(n_); }

  std::vector<double> points() const {
    std::vector<double> t(n_);
    for (std::size_t j = 0; j < n_; ++j) t[j] = at(j);
    return t;
  }

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  std::size_t n_;
};

inline TimeGrid make_uniform_grid(std::size_t n) { return TimeGrid(n); }

/// A sorted subset of a parent uniform grid.
class ScatterSet {
 public:
  ScatterSet(std::vector<std::size_t> indices, std::size_t parent_n)
      : indices_(std::move(indices)), parent_n_(parent_n) {
    if (parent_n_ < 2) fail(ErrorKind::invalid_argument, "parent grid needs at least 2 points");
    for (std::size_t i = 0; i < indices_.size(); ++i) {
      if (indices_[i] >= parent_n_) fail(ErrorKind::invalid_argument, "sample index out of range");
      if (i > 0 && indices_[i] <= indices_[i - 1])
        fail(ErrorKind::invalid_argument, "sample indices must be strictly increasing");
    }
  }

  std::size_t size() const noexcept { return indices_.size(); }
  std::size_t parent_size() const noexcept { return parent_n_; }
  std::span<const std::size_t> indices() const noexcept { return indices_; }
  TimeGrid parent_grid() const { return TimeGrid(parent_n_); }

  std::vector<double> times() const {
    std::vector<double> t(indices_.size());
    for (std::size_t i = 0; i < t.size(); ++i)
      t[i] = static_cast<double>(indices_[i]) / static_cast<double>(parent_n_);
    return t;
  }

  friend bool operator==(const ScatterSet&, const ScatterSet&) = default;

 private:
  std::vector<std::size_t> indices_;
  std::size_t parent_n_;
};

/// Real samples on either a uniform grid or a scattered subset of one.
class Signal {
 public:
  Signal(TimeGrid grid, std::vector<double> values) : domain_(grid), values_(std::move(values)) {
    check(grid.size());
  }
  Signal(ScatterSet samples, std::vector<double> values)
      : domain_(std::move(samples)), values_(std::move(values)) {
    check(std::get<ScatterSet>(domain_).size());
  }

  bool is_uniform() const noexcept { return std::holds_alternative<TimeGrid>(domain_); }

  const TimeGrid& grid() const {
    if (!is_uniform()) fail(ErrorKind::invalid_argument, "signal is not on a uniform grid");
    return std::get<TimeGrid>(domain_);
  }
  const ScatterSet& samples() const {
    if (is_uniform()) fail(ErrorKind::invalid_argument, "signal is not on a scattered sample set");
    return std::get<ScatterSet>(domain_);
  }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const double> values() const noexcept { return values_; }
  std::vector<double> times() const { return is_uniform() ? grid().points() : samples().times(); }

 private:
  void check(std::size_t expected) const {
    if (values_.size() != expected)
      fail(ErrorKind::invalid_argument, "signal length " + std::to_string(values_.size()) +
                                            " does not match grid size " + std::to_string(expected));
    for (double v : values_)
      if (!std::isfinite(v)) fail(ErrorKind::invalid_argument, "signal contains non-finite values");
  }

  std::variant<TimeGrid, ScatterSet> domain_;
  std::vector<double> values_;
};

/// Monotone phase sampled on a uniform grid together with its derivative.
///
/// The cycle count L = (θ(1) - θ(0)) / 2π is taken from the grid mean of θ',
/// which equals the integral of θ' over one period exactly for band-limited θ'.
class PhaseFn {
 public:
  PhaseFn(std::vector<double> values, std::vector<double> derivative)
      : values_(std::move(values)), derivative_(std::move(derivative)) {
    if (values_.size() != derivative_.size())
      fail(ErrorKind::invalid_argument, "phase values and derivative differ in length");
    if (values_.size() < 2) fail(ErrorKind::invalid_argument, "phase needs at least 2 grid points");
    for (std::size_t j = 0; j < values_.size(); ++j)
      if (!std::isfinite(values_[j]) || !std::isfinite(derivative_[j]))
        fail(ErrorKind::invalid_argument, "phase contains non-finite values");
  }

  std::size_t size() const noexcept { return values_.size(); }
  TimeGrid grid() const { return TimeGrid(values_.size()); }
  std::span<const double> values() const noexcept { return values_; }
  std::span<const double> derivative() const noexcept { return derivative_; }
  double start() const noexcept { return values_.front(); }

  /// θ(1) - θ(0).
  double total_advance() const {
    return std::accumulate(derivative_.begin(), derivative_.end(), 0.0) / static_cast<double>(size());
  }
  double cycle_count() const { return total_advance() / kTwoPi; }
  double min_derivative() const { return *std::min_element(derivative_.begin(), derivative_.end()); }

  /// θ(t) = 2π L t + θ(0) on the grid.
  static PhaseFn linear(const TimeGrid& grid, double cycles, double offset = 0.0) {
    std::vector<double> v(grid.size()), d(grid.size(), kTwoPi * cycles);
    for (std::size_t j = 0; j < grid.size(); ++j) v[j] = offset + kTwoPi * cycles * grid.at(j);
    return PhaseFn(std::move(v), std::move(d));
  }

 private:
  std::vector<double> values_;
  std::vector<double> derivative_;
};

struct GroundTruth {
  std::vector<double> a0;
  std::vector<double> a1;
  PhaseFn phase;
  double noise_sigma = 0.0;

  /// a0 + a1 cos θ without noise.
  std::vector<double> clean_signal() const {
    std::vector<double> f(a0.size());
    auto theta = phase.values();
    for (std::size_t j = 0; j < f.size(); ++j) f[j] = a0[j] + a1[j] * std::cos(theta[j]);
    return f;
  }
  std::vector<double> imf() const {
    std::vector<double> m(a1.size());
    auto theta = phase.values();
    for (std::size_t j = 0; j < m.size(); ++j) m[j] = a1[j] * std::cos(theta[j]);
    return m;
  }
};

/// Random-number conventions: every stochastic routine seeds a std::mt19937_64
/// with the caller's seed and draws through boost::random distributions, whose
/// algorithms (ziggurat normal, rejection uniform-int) are fixed in source, so
/// results are bit-reproducible across platforms and standard libraries.
using Rng = std::mt19937_64;

/// Uniform draw of `count` distinct grid indices (partial Fisher-Yates), sorted.
inline ScatterSet subsample_random(const TimeGrid& grid, std::size_t count, std::uint64_t seed) {
  if (count == 0 || count > grid.size())
    fail(ErrorKind::invalid_argument, "sample count " + std::to_string(count) + " not in [1, " +
                                          std::to_string(grid.size()) + "]");
  std::vector<std::size_t> pool(grid.size());
  std::iota(pool.begin(), pool.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = 0; i < count; ++i) {
    boost::random::uniform_int_distribution<std::size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(count);
  std::sort(pool.begin(), pool.end());
  return ScatterSet(std::move(pool), grid.size());
}

inline std::vector<double> gaussian_noise(std::size_t n, double sigma, std::uint64_t seed) {
  if (!(sigma >= 0.0)) fail(ErrorKind::invalid_argument, "noise sigma must be nonnegative");
  std::vector<double> x(n, 0.0);
  if (sigma == 0.0) return x;
  Rng rng(seed);
  boost::random::normal_distribution<double> normal(0.0, 1.0);
  for (double& v : x) v = sigma * normal(rng);
  return x;
}

inline Signal add_gaussian_noise(const Signal& signal, double sigma, std::uint64_t seed) {
  auto noise = gaussian_noise(signal.size(), sigma, seed);
  std::vector<double> out(signal.values().begin(), signal.values().end());
  for (std::size_t j = 0; j < out.size(); ++j) out[j] += noise[j];
  if (signal.is_uniform()) return Signal(signal.grid(), std::move(out));
  return Signal(signal.samples(), std::move(out));
}

/// Restrict a uniform-grid signal to a scattered subset of the same grid.
inline Signal restrict_to(const Signal& signal, const ScatterSet& samples) {
  if (signal.grid().size() != samples.parent_size())
    fail(ErrorKind::invalid_argument, "sample set parent grid does not match signal grid");
  std::vector<double> v;
  v.reserve(samples.size());
  for (std::size_t idx : samples.indices()) v.push_back(signal.values()[idx]);
  return Signal(samples, std::move(v));
}

}  // namespace dtfa
