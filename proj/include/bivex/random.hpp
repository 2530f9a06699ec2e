#pragma once

#include <cmath>
#include <random>
#include <span>
#include <vector>

namespace bivex {

using Rng = std::mt19937_64;

/// Uniform draw on the open interval (0, 1).
inline double open_uniform(Rng& rng) {
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double u = 0.0;
  do {
    u = dist(rng);
  } while (u <= 0.0 || u >= 1.0);
  return u;
}

inline double standard_normal(Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  return dist(rng);
}

/// Gamma draw with the given shape and unit scale.
inline double gamma_draw(double shape, Rng& rng) {
  std::gamma_distribution<double> dist(shape, 1.0);
  return dist(rng);
}

/// Dirichlet draw; normalised gamma deviates.
inline std::vector<double> dirichlet_draw(std::span<const double> alpha, Rng& rng) {
  std::vector<double> out(alpha.size());
  double total = 0.0;
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    out[i] = gamma_draw(alpha[i], rng);
    total += out[i];
  }
  for (auto& x : out) x /= total;
  return out;
}

}  // namespace bivex
