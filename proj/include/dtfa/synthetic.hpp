#pragma once

// Analytic test signals f = a0 + a1 cos θ used by the benchmark experiments.
// Each generator evaluates its closed form directly on the requested grid.

#include <cmath>
#include <cstdint>
#include <utility>

#include "dtfa/core.hpp"

namespace dtfa {

inline constexpr double kExample3NoiseSigma = 0.1;

inline GroundTruth example_ground_truth(int example_id, const TimeGrid& grid) {
  constexpr double pi = std::numbers::pi;
  const std::size_t n = grid.size();
  std::vector<double> a0(n), a1(n), theta(n), dtheta(n);
  double sigma = 0.0;

  for (std::size_t j = 0; j < n; ++j) {
    const double t = grid.at(j);
    switch (example_id) {
      case 1: {
        theta[j] = 20 * pi * t + 2 * std::cos(2 * pi * t) + 2 * std::sin(4 * pi * t);
        dtheta[j] = 20 * pi - 4 * pi * std::sin(2 * pi * t) + 8 * pi * std::cos(4 * pi * t);
        const double s = theta[j] / 10;
        a0[j] = 2 + std::cos(s) + 2 * std::sin(2 * s) + std::cos(3 * s);
        a1[j] = 3 + std::cos(s) + std::sin(3 * s);
        break;
      }
      case 2:
      case 3: {
        theta[j] = 200 * pi * t - 10 * std::cos(2 * pi * t) - 2 * std::sin(4 * pi * t);
        dtheta[j] = 200 * pi + 20 * pi * std::sin(2 * pi * t) - 8 * pi * std::cos(4 * pi * t);
        if (example_id == 2) {
          const double s = theta[j] / 100;
          a0[j] = std::cos(s);
          a1[j] = 3 + std::cos(s) + std::sin(2 * s);
        } else {
          theta[j] += 0.1 * std::sin(120 * pi * t);
          dtheta[j] += 12 * pi * std::cos(120 * pi * t);
          a0[j] = std::cos(2 * pi * t);
          a1[j] = 3 + std::cos(2 * pi * t) + std::sin(4 * pi * t);
          sigma = kExample3NoiseSigma;
        }
        break;
      }
      default:
        fail(ErrorKind::invalid_argument, "unknown example id " + std::to_string(example_id));
    }
  }
  return GroundTruth{std::move(a0), std::move(a1), PhaseFn(std::move(theta), std::move(dtheta)), sigma};
}

/// Signal and exact ground truth for example 1, 2 or 3. Only example 3 is
/// noisy; `seed` drives its Gaussian noise and is ignored otherwise.
inline std::pair<Signal, GroundTruth> gen_example_signal(int example_id, const TimeGrid& grid,
                                                         std::uint64_t seed) {
  GroundTruth truth = example_ground_truth(example_id, grid);
  auto f = truth.clean_signal();
  if (truth.noise_sigma > 0.0) {
    auto noise = gaussian_noise(f.size(), truth.noise_sigma, seed);
    for (std::size_t j = 0; j < f.size(); ++j) f[j] += noise[j];
  }
  return {Signal(grid, std::move(f)), std::move(truth)};
}

}  // namespace dtfa
