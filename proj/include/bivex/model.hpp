#pragma once

// Joint model: two MGPD margins coupled by a copula mixture.

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "bivex/copula.hpp"
#include "bivex/marginal.hpp"
#include "bivex/random.hpp"

namespace bivex {

struct ModelParams {
  MarginalParams m1;
  MarginalParams m2;
  CopulaMixture dep;

  const MarginalParams& margin(int i) const { return i == 0 ? m1 : m2; }
  MarginalParams& margin(int i) { return i == 0 ? m1 : m2; }
};

std::optional<std::string> check(const ModelParams& theta);
void validate(const ModelParams& theta);

struct Dataset {
  std::vector<std::array<double, 2>> pairs;
  std::array<std::string, 2> labels{"x1", "x2"};

  std::size_t size() const { return pairs.size(); }
  std::vector<double> column(int i) const;
};

/// Throws DataError naming the first non-finite or nonpositive entry.
void validate(const Dataset& data);

/// Sum over observations of log c(F1, F2) + log f1 + log f2; -inf when any
/// point falls outside the support.
double log_likelihood(const ModelParams& theta, const Dataset& data);

/// P(X1 > x1, X2 > x2).
Probability joint_exceedance(const ModelParams& theta, double x1, double x2);

/// P(F1(X1) > u | F2(X2) > u). Rejects u > 1 - 1e-10.
Probability chi_u(const ModelParams& theta, Probability u);
/// 2 log(1 - u) / log P(F1(X1) > u, F2(X2) > u) - 1.
double chibar_u(const ModelParams& theta, Probability u);

Dataset model_sample(const ModelParams& theta, std::size_t n, Rng& rng);

/// Scalar parameter names in a fixed order: per margin w, mu, eta, xi, sigma,
/// u (prefixed m1_/m2_), then copula weights, rho or theta, v, delta1, delta2
/// (prefixed cop_), the latter three only when the family has them.
std::vector<std::string> parameter_names(const ModelParams& layout);
std::vector<double> flatten(const ModelParams& theta);
/// Inverse of flatten for a parameter vector with the same layout.
ModelParams unflatten(const ModelParams& layout, const std::vector<double>& values);
/// Layout with the given family and sizes; values are placeholders.
ModelParams make_layout(CopulaFamily family, std::size_t copula_components, std::size_t n1, std::size_t n2);

}  // namespace bivex
