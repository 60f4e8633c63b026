#pragma once

// Warped Fourier sensing matrices and an l1 solver for
//   min ||x||_1  subject to  ||A x - f||_2 <= tol
// by Douglas-Rachford splitting between the l1 prox (complex soft threshold)
// and the exact projection onto the data-fit set.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "dtfa/core.hpp"
#include "dtfa/theta_spectral.hpp"

namespace dtfa {

struct SensingMatrix {
  Eigen::MatrixXcd entries;
  std::vector<double> row_times;
  /// Row scale sqrt(θ̄'(t_j)/N_f) when weighted, otherwise 1.
  std::vector<double> row_weights;
  long k_min = 0;
  bool weighted = false;

  std::size_t rows() const noexcept { return static_cast<std::size_t>(entries.rows()); }
  std::size_t cols() const noexcept { return static_cast<std::size_t>(entries.cols()); }
  long wavenumber(std::size_t col) const noexcept { return k_min + static_cast<long>(col); }
};

/// A(j,k) = exp(i2πk θ̄(t_j)), k = -N_b/2+1 .. N_b/2, optionally with row j
/// scaled by sqrt(θ̄'(t_j)/N_f). Sample times are nodes of θ̄'s grid.
inline SensingMatrix build_matrix(const PhaseFn& theta_bar, const ScatterSet& samples, std::size_t n_b,
                                  bool weighted) {
  if (n_b < 2 || n_b % 2 != 0) fail(ErrorKind::invalid_argument, "basis size N_b must be even and >= 2");
  if (samples.parent_size() != theta_bar.size())
    fail(ErrorKind::invalid_argument, "sample set and phase grids differ");
  const double n_f = static_cast<double>(theta_bar.size());
  SensingMatrix m;
  m.k_min = -static_cast<long>(n_b / 2) + 1;
  m.weighted = weighted;
  m.row_times = samples.times();
  m.entries.resize(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(n_b));
  for (std::size_t r = 0; r < samples.size(); ++r) {
    const std::size_t idx = samples.indices()[r];
    const double slope = theta_bar.derivative()[idx];
    if (!(slope > 0.0)) fail(ErrorKind::invalid_phase, "normalized phase derivative is not positive at a sample");
    const double w = weighted ? std::sqrt(slope / n_f) : 1.0;
    m.row_weights.push_back(w);
    detail::for_each_phasor(theta_bar.values()[idx], m.k_min, m.k_min + static_cast<long>(n_b) - 1, 1.0,
                            [&](long k, cplx z) { m.entries(static_cast<Eigen::Index>(r), k - m.k_min) = w * z; });
  }
  return m;
}

/// Every node of the phase grid as a sample.
inline ScatterSet all_samples(std::size_t n) {
  std::vector<std::size_t> idx(n);
  for (std::size_t j = 0; j < n; ++j) idx[j] = j;
  return ScatterSet(std::move(idx), n);
}

struct BasisPursuitOptions {
  /// Absolute bound on ||Ax - f||_2 measured inside the range of A; the part
  /// of f orthogonal to range(A) cannot be fitted and is excluded.
  double tol = 0.0;
  std::size_t max_iter = 20000;
  /// Stop when the two half-steps agree: ||prox - proj|| <= rel_tol·||x||.
  double rel_tol = 1e-10;
  /// Soft-threshold step as a multiple of max |x_ls| (minimum-norm fit).
  double step_scale = 0.1;
};

struct BPSolution {
  Eigen::VectorXcd x;
  double objective = 0.0;
  double primal_residual = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  /// Douglas-Rachford state, reusable as a warm start.
  Eigen::VectorXcd state;
  /// Columns left nonzero by the final soft-threshold step.
  std::vector<std::size_t> support;
};

namespace detail {

/// Thin spectral factorization A = U Σ V^H restricted to Σ > 0, stored as
/// what the projection needs: V, σ, and U^H f.
struct DataFitSet {
  Eigen::MatrixXcd v;
  Eigen::VectorXd sigma;
  Eigen::VectorXcd g;
  double tol = 0.0;

  DataFitSet(const Eigen::MatrixXcd& a, const Eigen::VectorXcd& f, double tol_in) : tol(tol_in) {
    const bool wide = a.rows() <= a.cols();
    const Eigen::MatrixXcd gram = wide ? Eigen::MatrixXcd(a * a.adjoint()) : Eigen::MatrixXcd(a.adjoint() * a);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(gram);
    const Eigen::VectorXd lam = eig.eigenvalues();
    const double lam_max = lam.size() ? lam.maxCoeff() : 0.0;
    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < lam.size(); ++i)
      if (lam(i) > 1e-12 * lam_max && lam(i) > 0.0) keep.push_back(i);
    const auto r = static_cast<Eigen::Index>(keep.size());
    sigma.resize(r);
    v.resize(a.cols(), r);
    g.resize(r);
    for (Eigen::Index c = 0; c < r; ++c) {
      const Eigen::Index i = keep[static_cast<std::size_t>(c)];
      const double s = std::sqrt(lam(i));
      sigma(c) = s;
      if (wide) {
        const Eigen::VectorXcd u = eig.eigenvectors().col(i);
        v.col(c) = a.adjoint() * u / s;
        g(c) = u.dot(f);
      } else {
        v.col(c) = eig.eigenvectors().col(i);
        g(c) = (a * v.col(c)).dot(f) / s;
      }
    }
  }

  /// Minimum-norm least-squares solution.
  Eigen::VectorXcd min_norm() const { return v * (g.array() / sigma.array().cast<cplx>()).matrix(); }

  /// Euclidean projection onto {x : ||P_range(Ax - f)|| <= tol}.
  Eigen::VectorXcd project(const Eigen::VectorXcd& z) const {
    const Eigen::VectorXcd d = (sigma.cast<cplx>().array() * (v.adjoint() * z).array()).matrix() - g;
    const double dn = d.norm();
    if (dn <= tol) return z;
    Eigen::VectorXd coef(sigma.size());
    if (tol <= 0.0) {
      coef = sigma.cwiseInverse();
    } else {
      // Secular equation ||r(μ)|| = tol with r_i = d_i / (1 + μσ_i²); Newton on
      // 1/||r|| - 1/tol, which is concave and increasing in μ.
      const Eigen::VectorXd d2 = d.cwiseAbs2();
      const Eigen::VectorXd s2 = sigma.cwiseAbs2();
      double mu = 0.0;
      for (int it = 0; it < 100; ++it) {
        const Eigen::VectorXd den = (1.0 + mu * s2.array()).matrix();
        const double r2 = (d2.array() / den.array().square()).sum();
        const double rn = std::sqrt(r2);
        const double dr2 = -2.0 * (d2.array() * s2.array() / den.array().cube()).sum();
        const double psi = 1.0 / rn - 1.0 / tol;
        const double dpsi = -0.5 * dr2 / (r2 * rn);
        const double step = psi / dpsi;
        mu -= step;
        if (std::abs(step) <= 1e-14 * std::max(mu, 1e-300)) break;
      }
      coef = (mu * sigma.array() / (1.0 + mu * sigma.array().square())).matrix();
    }
    return z - v * (coef.cast<cplx>().array() * d.array()).matrix();
  }
};

inline Eigen::VectorXcd soft_threshold(const Eigen::VectorXcd& v, double gamma) {
  Eigen::VectorXcd out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::abs(v(i));
    out(i) = m > gamma ? v(i) * ((m - gamma) / m) : cplx{};
  }
  return out;
}

}  // namespace detail

inline BPSolution basis_pursuit(const SensingMatrix& a, const Eigen::VectorXcd& f, const BasisPursuitOptions& opts,
                                const Eigen::VectorXcd* warm_state = nullptr) {
  if (static_cast<std::size_t>(f.size()) != a.rows())
    fail(ErrorKind::invalid_argument, "right-hand side length does not match matrix rows");
  if (!(opts.tol >= 0.0)) fail(ErrorKind::invalid_argument, "tolerance must be nonnegative");
  BPSolution sol;
  const auto n = static_cast<Eigen::Index>(a.cols());
  if (f.norm() <= opts.tol || f.norm() == 0.0) {
    sol.x = Eigen::VectorXcd::Zero(n);
    sol.state = sol.x;
    sol.primal_residual = f.norm();
    sol.converged = true;
    return sol;
  }
  const detail::DataFitSet fit(a.entries, f, opts.tol);
  const Eigen::VectorXcd x_ls = fit.min_norm();
  const double gamma = opts.step_scale * x_ls.cwiseAbs().maxCoeff();

  Eigen::VectorXcd z = (warm_state && warm_state->size() == n) ? *warm_state : x_ls;
  Eigen::VectorXcd x = fit.project(z);
  Eigen::VectorXcd y;
  std::size_t it = 0;
  for (; it < opts.max_iter; ++it) {
    y = detail::soft_threshold(2.0 * x - z, gamma);
    const double gap = (y - x).norm();
    z += y - x;
    x = fit.project(z);
    if (gap <= opts.rel_tol * std::max(x.norm(), 1e-300)) {
      sol.converged = true;
      ++it;
      break;
    }
  }
  for (Eigen::Index k = 0; k < y.size(); ++k)
    if (y(k) != cplx{}) sol.support.push_back(static_cast<std::size_t>(k));
  sol.x = x;
  sol.state = z;
  sol.iterations = it;
  sol.objective = x.cwiseAbs().sum();
  sol.primal_residual = (a.entries * x - f).norm();
  return sol;
}

/// Least-squares refit of f on the given columns; other entries become zero.
/// Removes the shrinkage bias of the l1 solution.
inline Eigen::VectorXcd refit_on_support(const SensingMatrix& a, const Eigen::VectorXcd& f,
                                         std::span<const std::size_t> support) {
  Eigen::MatrixXcd sub(a.entries.rows(), static_cast<Eigen::Index>(support.size()));
  for (std::size_t c = 0; c < support.size(); ++c)
    sub.col(static_cast<Eigen::Index>(c)) = a.entries.col(static_cast<Eigen::Index>(support[c]));
  const Eigen::VectorXcd coef = sub.colPivHouseholderQr().solve(f);
  Eigen::VectorXcd x = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(a.cols()));
  for (std::size_t c = 0; c < support.size(); ++c)
    x(static_cast<Eigen::Index>(support[c])) = coef(static_cast<Eigen::Index>(c));
  return x;
}

/// Averages x(k) with conj(x(-k)) wherever both wavenumbers are present.
inline void enforce_conjugate_symmetry(Eigen::VectorXcd& x, long k_min) {
  const long k_max = k_min + static_cast<long>(x.size()) - 1;
  for (long k = 0; k <= k_max; ++k) {
    if (-k < k_min) continue;
    auto& p = x(k - k_min);
    auto& q = x(-k - k_min);
    const cplx avg = 0.5 * (p + std::conj(q));
    p = avg;
    q = std::conj(avg);
  }
}

}  // namespace dtfa
