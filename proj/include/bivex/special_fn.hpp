#pragma once

// Special functions and univariate/bivariate distribution primitives.
//
// Densities are returned on the log scale; a log-density of -infinity encodes
// zero density and NaN is never returned for valid arguments.

#include <functional>
#include <limits>
#include <span>

namespace bivex {

using Probability = double;
using LogDensity = double;

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();
inline constexpr double kPi = 3.141592653589793238462643383279502884;

double log_gamma(double x);
double trigamma(double x);

double normal_log_pdf(double x);
Probability normal_cdf(double x);
/// log Phi(x), accurate far into the lower tail.
double normal_log_cdf(double x);
double normal_quantile(Probability p);

LogDensity student_t_log_pdf(double x, double v);
Probability student_t_cdf(double x, double v);
/// Returns +-infinity when the quantile exceeds the double range (tiny v).
double student_t_quantile(Probability p, double v);

/// P(Z1 <= z1, Z2 <= z2) for a standard bivariate normal with correlation rho.
/// Infinite limits are accepted.
Probability bvn_cdf(double z1, double z2, double rho);

/// P(T1 <= z1, T2 <= z2) for a standard bivariate Student-t with correlation
/// rho and v degrees of freedom. Integer v uses the Dunnett-Sobel series;
/// other v integrate the conditional representation numerically.
Probability bvt_cdf(double z1, double z2, double rho, double v);

/// Skew-normal with density 2 phi(z) Phi(lambda z).
LogDensity skew_normal_log_pdf(double x, double lambda);
Probability skew_normal_cdf(double x, double lambda);
double skew_normal_quantile(Probability p, double lambda);

/// Skew-t with density 2 t_v(z) T_{v+1}(lambda z sqrt((v+1)/(z^2+v))).
LogDensity skew_t_log_pdf(double x, double lambda, double v);
Probability skew_t_cdf(double x, double lambda, double v);
double skew_t_quantile(Probability p, double lambda, double v);

struct Bracket {
  double lo;
  double hi;
};

/// Solves F(x) = p for a nondecreasing F by bracketed root finding.
///
/// The bracket is widened geometrically until it contains p. If a density is
/// supplied, safeguarded Newton steps are used inside the bracket. Converges
/// when |F(x) - p| <= 1e-10, tightened to 2e-10 * min(p, 1 - p) in the tails,
/// or when the bracket collapses to adjacent doubles; throws ConvergenceError
/// after 200 steps.
double invert_cdf(const std::function<double(double)>& cdf, Probability p, Bracket bracket,
                  const std::function<double(double)>& density = {});

/// log(sum(exp(xs))) without overflow; -inf for an empty or all -inf input.
double log_sum_exp(std::span<const double> xs);

}  // namespace bivex
