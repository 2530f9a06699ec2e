#include "bivex/marginal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <boost/math/special_functions/gamma.hpp>

#include "bivex/error.hpp"
#include "bivex/random.hpp"

namespace bivex {

std::optional<double> GpdParams::upper_endpoint() const {
  if (xi < 0.0 && std::abs(xi) >= kXiZeroTolerance) return u - sigma / xi;
  return std::nullopt;
}

std::optional<std::string> check(const GpdParams& p) {
  if (!std::isfinite(p.xi) || !std::isfinite(p.u)) return "GPD xi and u must be finite";
  if (!(p.sigma > 0.0) || !std::isfinite(p.sigma)) return "GPD sigma must be positive";
  return std::nullopt;
}

std::optional<std::string> check(const GammaMixParams& p) {
  const std::size_t n = p.w.size();
  if (n == 0) return "gamma mixture needs at least one component";
  if (p.eta.size() != n || p.mu.size() != n) return "gamma mixture vectors differ in length";
  double total = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (!(p.w[j] >= 0.0)) return "gamma mixture weights must be nonnegative";
    if (!(p.eta[j] > 0.0) || !std::isfinite(p.eta[j])) return "gamma shapes must be positive";
    if (!(p.mu[j] > 0.0) || !std::isfinite(p.mu[j])) return "gamma means must be positive";
    if (j > 0 && !(p.mu[j] > p.mu[j - 1])) return "gamma means must be strictly increasing";
    total += p.w[j];
  }
  if (std::abs(total - 1.0) > 1e-9) return "gamma mixture weights must sum to one";
  return std::nullopt;
}

std::optional<std::string> check(const MarginalParams& p) {
  if (auto e = check(p.bulk)) return e;
  return check(p.tail);
}

void validate(const MarginalParams& p) {
  if (auto e = check(p)) throw ParameterError(*e);
}

LogDensity gamma_log_pdf(double x, double mu, double eta) {
  if (!(x > 0.0)) throw DomainError("gamma_log_pdf: x must be positive");
  const double rate = eta / mu;
  return eta * std::log(rate) - boost::math::lgamma(eta) + (eta - 1.0) * std::log(x) - rate * x;
}

Probability gamma_cdf(double x, double mu, double eta) {
  if (!(x > 0.0)) throw DomainError("gamma_cdf: x must be positive");
  if (std::isinf(x)) return 1.0;
  return boost::math::gamma_p(eta, eta * x / mu);
}

LogDensity gamma_mix_pdf(double x, const GammaMixParams& p) {
  if (!(x > 0.0)) throw DomainError("gamma_mix_pdf: x must be positive");
  std::vector<double> terms(p.size());
  for (std::size_t j = 0; j < p.size(); ++j) {
    terms[j] = p.w[j] > 0.0 ? std::log(p.w[j]) + gamma_log_pdf(x, p.mu[j], p.eta[j]) : kNegInf;
  }
  return log_sum_exp(terms);
}

Probability gamma_mix_cdf(double x, const GammaMixParams& p) {
  if (!(x > 0.0)) throw DomainError("gamma_mix_cdf: x must be positive");
  double h = 0.0;
  for (std::size_t j = 0; j < p.size(); ++j) h += p.w[j] * gamma_cdf(x, p.mu[j], p.eta[j]);
  return std::clamp(h, 0.0, 1.0);
}

Probability gpd_cdf(double x, const GpdParams& p) {
  if (x < p.u) throw SupportError("gpd_cdf: x below threshold");
  const double z = (x - p.u) / p.sigma;
  if (std::abs(p.xi) < kXiZeroTolerance) return -std::expm1(-z);
  const double t = p.xi * z;
  if (t <= -1.0) return 1.0;
  return -std::expm1(-std::log1p(t) / p.xi);
}

LogDensity gpd_pdf(double x, const GpdParams& p) {
  if (x < p.u) throw SupportError("gpd_pdf: x below threshold");
  const double z = (x - p.u) / p.sigma;
  if (std::abs(p.xi) < kXiZeroTolerance) return -std::log(p.sigma) - z;
  const double t = p.xi * z;
  if (t <= -1.0) return kNegInf;
  return -std::log(p.sigma) - (1.0 / p.xi + 1.0) * std::log1p(t);
}

LogDensity mgpd_pdf(double x, const MarginalParams& p) {
  if (!(x > 0.0)) throw DomainError("mgpd_pdf: x must be positive");
  if (x <= p.tail.u) return gamma_mix_pdf(x, p.bulk);
  const double hu = p.tail.u > 0.0 ? gamma_mix_cdf(p.tail.u, p.bulk) : 0.0;
  if (hu >= 1.0) return kNegInf;
  return std::log1p(-hu) + gpd_pdf(x, p.tail);
}

Probability mgpd_cdf(double x, const MarginalParams& p) {
  if (!(x > 0.0)) throw DomainError("mgpd_cdf: x must be positive");
  if (x <= p.tail.u) return gamma_mix_cdf(x, p.bulk);
  const double hu = p.tail.u > 0.0 ? gamma_mix_cdf(p.tail.u, p.bulk) : 0.0;
  return std::min(1.0, hu + (1.0 - hu) * gpd_cdf(x, p.tail));
}

double mgpd_quantile(Probability p, const MarginalParams& m) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("mgpd_quantile: p must lie in (0,1)");
  const GpdParams& t = m.tail;
  const double hu = t.u > 0.0 ? gamma_mix_cdf(t.u, m.bulk) : 0.0;
  if (p == hu) return t.u;
  if (p > hu) {
    // log of 1 - (p - H(u)) / (1 - H(u))
    const double log_tail = std::log((1.0 - p) / (1.0 - hu));
    if (std::abs(t.xi) < kXiZeroTolerance) return t.u - t.sigma * log_tail;
    return t.u + t.sigma * std::expm1(-t.xi * log_tail) / t.xi;
  }
  const GammaMixParams& bulk = m.bulk;
  auto cdf = [&bulk](double x) { return x > 0.0 ? gamma_mix_cdf(x, bulk) : 0.0; };
  auto pdf = [&bulk](double x) { return x > 0.0 ? std::exp(gamma_mix_pdf(x, bulk)) : 0.0; };
  return invert_cdf(cdf, p, {0.0, t.u}, pdf);
}

std::vector<double> mgpd_sample(const MarginalParams& m, std::size_t n, std::mt19937_64& rng) {
  validate(m);
  std::vector<double> out(n);
  for (auto& x : out) x = mgpd_quantile(open_uniform(rng), m);
  return out;
}

}  // namespace bivex
