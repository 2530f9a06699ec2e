#pragma once

// MGPD marginal: a finite gamma mixture for the bulk spliced with a
// generalized Pareto tail above an unknown threshold u.

#include <cstddef>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "bivex/special_fn.hpp"

namespace bivex {

/// |xi| below this uses the exponential (xi = 0) branch of the GPD.
inline constexpr double kXiZeroTolerance = 1e-8;

struct GpdParams {
  double xi = 0.0;
  double sigma = 1.0;
  double u = 0.0;

  /// Finite upper support endpoint u - sigma/xi when xi < 0.
  std::optional<double> upper_endpoint() const;
};

/// Gamma mixture in the shape/mean parametrization
/// g(x | mu, eta) = Gamma(eta)^-1 (eta/mu)^eta x^(eta-1) exp(-eta x / mu).
struct GammaMixParams {
  std::vector<double> w;
  std::vector<double> eta;
  std::vector<double> mu;

  std::size_t size() const { return w.size(); }
};

struct MarginalParams {
  GammaMixParams bulk;
  GpdParams tail;
};

/// Returns a description of the first violated invariant, if any.
std::optional<std::string> check(const GpdParams& p);
std::optional<std::string> check(const GammaMixParams& p);
std::optional<std::string> check(const MarginalParams& p);
/// Throws ParameterError when check() reports a violation.
void validate(const MarginalParams& p);

LogDensity gamma_log_pdf(double x, double mu, double eta);
Probability gamma_cdf(double x, double mu, double eta);

LogDensity gamma_mix_pdf(double x, const GammaMixParams& p);
Probability gamma_mix_cdf(double x, const GammaMixParams& p);

/// GPD distribution function. Throws SupportError for x < u; clamps to 1
/// above a finite upper endpoint.
Probability gpd_cdf(double x, const GpdParams& p);
/// GPD log-density. Throws SupportError for x < u; -inf above the endpoint.
LogDensity gpd_pdf(double x, const GpdParams& p);

LogDensity mgpd_pdf(double x, const MarginalParams& p);
Probability mgpd_cdf(double x, const MarginalParams& p);

/// Closed form above H(u); numerical inversion of the bulk on (0, u] below.
double mgpd_quantile(Probability p, const MarginalParams& m);

std::vector<double> mgpd_sample(const MarginalParams& m, std::size_t n, std::mt19937_64& rng);

}  // namespace bivex
