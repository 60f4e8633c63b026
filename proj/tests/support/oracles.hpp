#pragma once

// Reference computations used by the tests. Each one is deliberately naive:
// direct sums in long double, full enumeration, dense SVD.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace oracle {

using cplx = std::complex<double>;
using lcplx = std::complex<long double>;

inline constexpr long double kTwoPiL = 2.0L * std::numbers::pi_v<long double>;

/// Σ_j w_j v_j exp(-i2πk x_j) for k = k_min..k_max, each term evaluated with
/// sin/cos in long double.
inline std::vector<cplx> direct_dft(std::span<const double> values, std::span<const double> points,
                                    std::span<const double> weights, long k_min, long k_max) {
  std::vector<cplx> out;
  for (long k = k_min; k <= k_max; ++k) {
    lcplx acc{};
    for (std::size_t j = 0; j < values.size(); ++j) {
      const long double w = weights.empty() ? 1.0L : static_cast<long double>(weights[j]);
      const long double arg = -kTwoPiL * static_cast<long double>(k) * static_cast<long double>(points[j]);
      acc += w * static_cast<long double>(values[j]) * lcplx(std::cos(arg), std::sin(arg));
    }
    out.emplace_back(static_cast<double>(acc.real()), static_cast<double>(acc.imag()));
  }
  return out;
}

/// (1/N) Σ_j v_j exp(-i2πk j/N) for k = -N/2+1..N/2.
inline std::vector<cplx> uniform_dft(std::span<const double> values) {
  const std::size_t n = values.size();
  std::vector<double> pts(n), w(n, 1.0 / static_cast<double>(n));
  for (std::size_t j = 0; j < n; ++j) pts[j] = static_cast<double>(j) / static_cast<double>(n);
  const long half = static_cast<long>(n / 2);
  return direct_dft(values, pts, w, -half + 1, half);
}

/// Re Σ_k c_k exp(i2πk x) with c indexed from k_min.
inline double direct_synthesis(std::span<const cplx> coeffs, long k_min, double x) {
  long double acc = 0.0L;
  for (std::size_t i = 0; i < coeffs.size(); ++i) {
    const long double arg = kTwoPiL * static_cast<long double>(k_min + static_cast<long>(i)) * x;
    acc += static_cast<long double>(coeffs[i].real()) * std::cos(arg) -
           static_cast<long double>(coeffs[i].imag()) * std::sin(arg);
  }
  return static_cast<double>(acc);
}

/// Largest k/100 (k = 100 down to 0) with θ' + (k/100)Δθ' ≥ 0 everywhere.
inline double beta_lattice_scan(std::span<const double> theta_prime, std::span<const double> delta_prime) {
  for (int k = 100; k >= 0; --k) {
    const double beta = k / 100.0;
    bool ok = true;
    for (std::size_t j = 0; j < theta_prime.size() && ok; ++j) ok = theta_prime[j] + beta * delta_prime[j] >= 0.0;
    if (ok) return beta;
  }
  return 0.0;
}

/// Visits every s-subset of {0..n-1} by walking a selection mask.
template <typename Visit>
void each_subset(std::size_t n, std::size_t s, Visit&& visit) {
  std::vector<bool> mask(n, false);
  std::fill(mask.begin(), mask.begin() + static_cast<long>(s), true);
  do {
    std::vector<std::size_t> cols;
    for (std::size_t i = 0; i < n; ++i)
      if (mask[i]) cols.push_back(i);
    visit(cols);
  } while (std::prev_permutation(mask.begin(), mask.end()));
}

/// Exact δ_S: max over all S-column submatrices of max(σmax² - 1, 1 - σmin²),
/// singular values by Jacobi SVD.
template <typename Matrix>
double exhaustive_delta(const Matrix& a, std::size_t s) {
  double delta = 0.0;
  each_subset(static_cast<std::size_t>(a.cols()), s, [&](const std::vector<std::size_t>& cols) {
    Matrix sub(a.rows(), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t c = 0; c < cols.size(); ++c) sub.col(static_cast<Eigen::Index>(c)) = a.col(static_cast<Eigen::Index>(cols[c]));
    Eigen::JacobiSVD<Matrix> svd(sub);
    const auto sv = svd.singularValues();
    const double hi = sv.maxCoeff(), lo = sv.minCoeff();
    delta = std::max({delta, hi * hi - 1.0, 1.0 - lo * lo});
  });
  return delta;
}

struct L1Vertex {
  Eigen::VectorXd x;
  double objective = std::numeric_limits<double>::infinity();
  /// Objective of the second-best distinct vertex; a gap certifies uniqueness.
  double runner_up = std::numeric_limits<double>::infinity();
};

/// min ||x||_1 s.t. A x = b for real A (m×n, full row rank m < n). The LP
/// optimum sits at a basic solution, so enumerate all m-column bases.
inline L1Vertex l1_by_vertex_enumeration(const Eigen::MatrixXd& a, const Eigen::VectorXd& b) {
  const auto m = static_cast<std::size_t>(a.rows()), n = static_cast<std::size_t>(a.cols());
  L1Vertex best;
  std::vector<Eigen::VectorXd> seen;
  each_subset(n, m, [&](const std::vector<std::size_t>& cols) {
    Eigen::MatrixXd basis(a.rows(), static_cast<Eigen::Index>(m));
    for (std::size_t c = 0; c < m; ++c) basis.col(static_cast<Eigen::Index>(c)) = a.col(static_cast<Eigen::Index>(cols[c]));
    Eigen::FullPivLU<Eigen::MatrixXd> lu(basis);
    if (lu.rank() < static_cast<Eigen::Index>(m)) return;
    const Eigen::VectorXd xb = lu.solve(b);
    Eigen::VectorXd x = Eigen::VectorXd::Zero(a.cols());
    for (std::size_t c = 0; c < m; ++c) x(static_cast<Eigen::Index>(cols[c])) = xb(static_cast<Eigen::Index>(c));
    const double obj = x.lpNorm<1>();
    if (obj < best.objective - 1e-12) {
      if ((x - best.x).norm() > 1e-9 || best.x.size() == 0) best.runner_up = best.objective;
      best.x = x;
      best.objective = obj;
    } else if (best.x.size() && (x - best.x).norm() > 1e-9) {
      best.runner_up = std::min(best.runner_up, obj);
    }
  });
  return best;
}

}  // namespace oracle
