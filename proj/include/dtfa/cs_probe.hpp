#pragma once

// Diagnostics for warped Fourier dictionaries: mutual coherence, restricted
// isometry estimates, the oscillatory-sum decay and closed-form bounds.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/constants/constants.hpp>
#include <boost/multiprecision/cpp_bin_float.hpp>
#include <boost/random/uniform_int_distribution.hpp>

#include "dtfa/basis_pursuit.hpp"
#include "dtfa/core.hpp"
#include "dtfa/fourier.hpp"

namespace dtfa {

/// max |(U^H U - I)_{kj}|.
inline double mutual_coherence(const SensingMatrix& u) {
  const Eigen::MatrixXcd g = u.entries.adjoint() * u.entries;
  double m = 0.0;
  for (Eigen::Index j = 0; j < g.cols(); ++j)
    for (Eigen::Index i = 0; i < g.rows(); ++i) m = std::max(m, std::abs(g(i, j) - (i == j ? 1.0 : 0.0)));
  return m;
}

/// Largest deviation max(λmax - 1, 1 - λmin) of the Gram matrix of the given
/// columns, i.e. max(σmax² - 1, 1 - σmin²).
inline double isometry_defect(const Eigen::MatrixXcd& a, std::span<const std::size_t> columns) {
  Eigen::MatrixXcd sub(a.rows(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c)
    sub.col(static_cast<Eigen::Index>(c)) = a.col(static_cast<Eigen::Index>(columns[c]));
  const Eigen::MatrixXcd gram = sub.adjoint() * sub;
  const Eigen::VectorXd lam = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd>(gram, Eigen::EigenvaluesOnly).eigenvalues();
  return std::max({lam.maxCoeff() - 1.0, 1.0 - lam.minCoeff(), 0.0});
}

enum class RipMode { monte_carlo, exhaustive };

inline constexpr std::size_t kMaxExhaustiveColumns = 14;

struct RipEstimate {
  std::size_t S = 0;
  /// Max defect over the supports examined; a lower bound on δ_S, exact in
  /// exhaustive mode.
  double delta_lower = 0.0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  RipMode mode = RipMode::monte_carlo;
};

namespace detail {

inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Calls visit(columns) for every S-subset of {0..n-1} in lexicographic order.
template <typename Visit>
void for_each_subset(std::size_t n, std::size_t s, Visit&& visit) {
  std::vector<std::size_t> idx(s);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  while (true) {
    visit(std::span<const std::size_t>(idx));
    std::size_t i = s;
    while (i > 0 && idx[i - 1] == n - s + i - 1) --i;
    if (i == 0) return;
    ++idx[i - 1];
    for (std::size_t j = i; j < s; ++j) idx[j] = idx[j - 1] + 1;
  }
}

}  // namespace detail

/// Trial t draws a uniform random permutation of the columns from a seed
/// derived from (seed, t) and uses its first S entries, so supports for
/// different S with the same seed are nested.
inline RipEstimate estimate_delta_s(const SensingMatrix& phi, std::size_t s, std::size_t trials, std::uint64_t seed,
                                    RipMode mode = RipMode::monte_carlo) {
  const std::size_t n = phi.cols();
  if (s < 1 || s > n) fail(ErrorKind::invalid_argument, "sparsity S must lie in [1, N_b]");
  RipEstimate est{s, 0.0, 0, seed, mode};
  if (mode == RipMode::exhaustive) {
    if (n > kMaxExhaustiveColumns) fail(ErrorKind::invalid_argument, "exhaustive mode needs N_b <= 14");
    detail::for_each_subset(n, s, [&](std::span<const std::size_t> cols) {
      est.delta_lower = std::max(est.delta_lower, isometry_defect(phi.entries, cols));
      ++est.trials;
    });
    return est;
  }
  if (trials < 1) fail(ErrorKind::invalid_argument, "trials must be at least 1");
  std::vector<std::size_t> perm(n);
  for (std::size_t t = 0; t < trials; ++t) {
    std::iota(perm.begin(), perm.end(), std::size_t{0});
    Rng rng(detail::mix_seed(seed, t));
    for (std::size_t i = 0; i < s; ++i) {
      boost::random::uniform_int_distribution<std::size_t> pick(i, n - 1);
      std::swap(perm[i], perm[pick(rng)]);
    }
    est.delta_lower = std::max(est.delta_lower, isometry_defect(phi.entries, std::span(perm).first(s)));
  }
  est.trials = trials;
  return est;
}

/// φ(t) = t + Σ_j [c_j sin(2πjt) - d_j (cos(2πjt) - 1)] / (2πj), so that
/// φ' = 1 + Σ_j (c_j cos 2πjt + d_j sin 2πjt) and φ(0) = 0, φ(1) = 1.
struct TrigWarp {
  std::vector<double> c;
  std::vector<double> d;

  std::size_t degree() const noexcept { return std::max(c.size(), d.size()); }
  double cos_coeff(std::size_t j) const noexcept { return j >= 1 && j <= c.size() ? c[j - 1] : 0.0; }
  double sin_coeff(std::size_t j) const noexcept { return j >= 1 && j <= d.size() ? d[j - 1] : 0.0; }

  template <typename Real>
  Real value(const Real& t) const {
    using std::cos;
    using std::sin;
    const Real two_pi = 2 * boost::math::constants::pi<Real>();
    Real v = t;
    for (std::size_t j = 1; j <= degree(); ++j) {
      const Real w = two_pi * static_cast<double>(j);
      v += (Real(cos_coeff(j)) * sin(w * t) - Real(sin_coeff(j)) * (cos(w * t) - 1)) / w;
    }
    return v;
  }

  template <typename Real>
  Real derivative(const Real& t) const {
    using std::cos;
    using std::sin;
    const Real two_pi = 2 * boost::math::constants::pi<Real>();
    Real v = 1;
    for (std::size_t j = 1; j <= degree(); ++j) {
      const Real w = two_pi * static_cast<double>(j);
      v += Real(cos_coeff(j)) * cos(w * t) + Real(sin_coeff(j)) * sin(w * t);
    }
    return v;
  }

  /// ||F(φ')||_1 in the complex exponential basis: 1 + Σ_j sqrt(c_j² + d_j²).
  double derivative_l1() const {
    double s = 1.0;
    for (std::size_t j = 1; j <= degree(); ++j) s += std::hypot(cos_coeff(j), sin_coeff(j));
    return s;
  }

  /// Minimum of φ' over a fine uniform sampling.
  double min_derivative(std::size_t per_mode = 64) const {
    const std::size_t n = per_mode * (degree() + 1);
    double m = INFINITY;
    for (std::size_t i = 0; i < n; ++i) m = std::min(m, derivative(static_cast<double>(i) / static_cast<double>(n)));
    return m;
  }

  /// Samples of θ = 2πL φ(t) on a grid, as a PhaseFn.
  PhaseFn sample_phase(const TimeGrid& grid, double cycles) const {
    std::vector<double> v(grid.size()), dv(grid.size());
    for (std::size_t j = 0; j < grid.size(); ++j) {
      v[j] = kTwoPi * cycles * value(grid.at(j));
      dv[j] = kTwoPi * cycles * derivative(grid.at(j));
    }
    return PhaseFn(std::move(v), std::move(dv));
  }
};

/// Precision used for oscillatory sums: their true values fall far below the
/// double-precision rounding level of the individual terms.
using HighPrecision = boost::multiprecision::number<boost::multiprecision::cpp_bin_float<400>>;

struct OscillatorySum {
  std::complex<double> value;
  double modulus = 0.0;
  /// max((k ||F(φ')||_1 / L)^n, (2 M0 / L)^n).
  double bound = 0.0;
  /// modulus / bound: the empirical stand-in for the unknown constant.
  double ratio = 0.0;
};

/// (1/L) Σ_{j<L} φ'(t_j) exp(i2πk φ(t_j)) on t_j = j/L, accumulated in `Real`.
template <typename Real = HighPrecision>
OscillatorySum oscillatory_sum(const TrigWarp& phi, long k, std::size_t l, int n) {
  if (l < 1) fail(ErrorKind::invalid_argument, "L must be positive");
  if (n < 0) fail(ErrorKind::invalid_argument, "order n must be nonnegative");
  if (!(phi.min_derivative() > 0.0)) fail(ErrorKind::invalid_phase, "phase is not strictly increasing");
  using std::cos;
  using std::sin;
  const Real two_pi = 2 * boost::math::constants::pi<Real>();
  Real re = 0, im = 0;
  for (std::size_t j = 0; j < l; ++j) {
    const Real t = Real(static_cast<long long>(j)) / Real(static_cast<long long>(l));
    const Real arg = two_pi * Real(k) * phi.value(t);
    const Real w = phi.derivative(t);
    re += w * cos(arg);
    im += w * sin(arg);
  }
  re /= Real(static_cast<long long>(l));
  im /= Real(static_cast<long long>(l));
  OscillatorySum out;
  out.value = {static_cast<double>(re), static_cast<double>(im)};
  using std::sqrt;
  out.modulus = static_cast<double>(sqrt(re * re + im * im));
  const double ld = static_cast<double>(l);
  const double m0 = static_cast<double>(phi.degree());
  out.bound = std::max(std::pow(std::abs(static_cast<double>(k)) * phi.derivative_l1() / ld, n),
                       std::pow(2.0 * m0 / ld, n));
  out.ratio = out.bound > 0.0 ? out.modulus / out.bound : INFINITY;
  return out;
}

/// Largest algebraic order n consistent with the decay of |sum| over a
/// sequence of doublings of L: every doubling must shrink the modulus by at
/// least 2^(n-1). Returns 1 + log2 of the smallest shrink factor.
inline double consistent_decay_order(std::span<const double> moduli) {
  if (moduli.size() < 2) fail(ErrorKind::invalid_argument, "need at least two moduli");
  double worst = INFINITY;
  for (std::size_t i = 1; i < moduli.size(); ++i) worst = std::min(worst, moduli[i - 1] / moduli[i]);
  return 1.0 + std::log2(worst);
}

/// Cardinality bound for the r-cover of the phase class: (16πM0²/r + 1)^{2M0},
/// or the sharper (8πM0²/r²)^{M0}.
inline double covering_bound(std::size_t m0, double r, bool sharp) {
  if (m0 < 1) fail(ErrorKind::invalid_argument, "M0 must be positive");
  if (!(r > 0.0)) fail(ErrorKind::invalid_argument, "radius r must be positive");
  const double pi = std::numbers::pi, m = static_cast<double>(m0);
  if (sharp) return std::pow(8.0 * pi * m * m / (r * r), m);
  return std::pow(16.0 * pi * m * m / r + 1.0, 2.0 * m);
}

/// |δ_S(A) - δ_S(B)| ≤ (2ε√M + ε²M)·S for unit-column A and ||A - B||_max ≤ ε.
inline double delta_perturbation_bound(double eps, std::size_t m, std::size_t s) {
  if (!(eps >= 0.0)) fail(ErrorKind::invalid_argument, "eps must be nonnegative");
  const double md = static_cast<double>(m);
  return (2.0 * eps * std::sqrt(md) + eps * eps * md) * static_cast<double>(s);
}

/// For φ' > 0 with mean 1 and cosine/sine coefficients c_j, d_j: checks
/// c_j² + d_j² ≤ 4 for every j and ||φ'||_∞ ≤ 4M0 + 1, with M0 the highest
/// mode present.
inline bool fourier_coeff_box_check(std::span<const double> phi_prime) {
  const std::size_t n = phi_prime.size();
  if (n < 2) fail(ErrorKind::invalid_argument, "need at least two samples");
  const double mean = std::accumulate(phi_prime.begin(), phi_prime.end(), 0.0) / static_cast<double>(n);
  if (std::abs(mean - 1.0) > 1e-9) fail(ErrorKind::invalid_argument, "phase derivative must have mean 1");
  const auto coeffs = fourier::forward(phi_prime);
  std::size_t m0 = 0;
  bool ok = true;
  for (std::size_t j = 1; j < (n + 1) / 2; ++j) {
    // c_j cos + d_j sin has complex coefficient (c_j - i d_j)/2 at +j.
    const double c2d2 = 4.0 * std::norm(coeffs[j]);
    if (c2d2 > 1e-24) m0 = j;
    if (c2d2 > 4.0 + 1e-9) ok = false;
  }
  double sup = 0.0;
  for (double v : phi_prime) sup = std::max(sup, std::abs(v));
  return ok && sup <= 4.0 * static_cast<double>(m0) + 1.0 + 1e-9;
}

}  // namespace dtfa
