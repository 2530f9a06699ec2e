#include "bivex/prior.hpp"

#include <algorithm>
#include <cmath>

#include <boost/math/tools/roots.hpp>

#include "bivex/error.hpp"

namespace bivex {

namespace {

// Type-7 empirical quantile of sorted data.
double sorted_quantile(const std::vector<double>& s, double p) {
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

double log_factorial(std::size_t n) { return log_gamma(static_cast<double>(n) + 1.0); }

bool on_simplex(const std::vector<double>& w) {
  double total = 0.0;
  for (double x : w) {
    if (!(x >= 0.0)) return false;
    total += x;
  }
  return std::abs(total - 1.0) <= 1e-9;
}

double dirichlet_one_logpdf(const std::vector<double>& w) {
  if (!on_simplex(w)) return kNegInf;
  return log_gamma(static_cast<double>(w.size()));
}

}  // namespace

std::optional<std::string> check(const PriorConfig& cfg, const ModelParams& shape) {
  for (int i = 0; i < 2; ++i) {
    const MarginPrior& p = cfg.margins[static_cast<std::size_t>(i)];
    const std::size_t n = shape.margin(i).bulk.size();
    const std::string tag = "margin " + std::to_string(i + 1) + " prior: ";
    if (p.eta_shape.size() != n || p.eta_mean.size() != n || p.mu_shape.size() != n || p.mu_mean.size() != n) {
      return tag + "hyperparameter vectors must match the number of gamma components";
    }
    for (std::size_t j = 0; j < n; ++j) {
      if (!(p.eta_shape[j] > 0.0) || !(p.eta_mean[j] > 0.0) || !(p.mu_mean[j] > 0.0)) {
        return tag + "gamma and inverse-gamma hyperparameters must be positive";
      }
      if (!(p.mu_shape[j] > 1.0)) return tag + "inverse-gamma shape must exceed 1 for its mean to exist";
    }
    if (!std::isfinite(p.u_mean)) return tag + "threshold mean must be finite";
    if (!(p.u_sd > 0.0) || !std::isfinite(p.u_sd)) return tag + "threshold sd must be positive";
  }
  if (!(cfg.df_poisson_mean > 1.0)) return "df_poisson_mean must exceed 1";
  if (!(cfg.phi_c >= 0.0)) return "phi_c must be nonnegative";
  return std::nullopt;
}

MarginPrior default_margin_prior(const std::vector<double>& x, const GammaMixParams& init) {
  if (x.empty()) throw DataError("cannot build a threshold prior from an empty margin");
  std::vector<double> s = x;
  std::sort(s.begin(), s.end());
  MarginPrior p;
  p.u_mean = sorted_quantile(s, 0.9);
  p.u_sd = (p.u_mean - sorted_quantile(s, 0.5)) / 4.0;
  if (!(p.u_sd > 0.0)) p.u_sd = std::max(1e-3 * std::abs(p.u_mean), 1e-6);
  const std::size_t n = init.size();
  p.eta_shape.assign(n, 1.0);
  p.eta_mean = init.eta;
  p.mu_shape.assign(n, 3.0);
  p.mu_mean = init.mu;
  return p;
}

double gpd_logprior(double xi, double sigma) {
  if (!(sigma > 0.0) || !(xi > -0.5) || !std::isfinite(xi) || !std::isfinite(sigma)) return kNegInf;
  return -std::log(sigma) - std::log1p(xi) - 0.5 * std::log1p(2.0 * xi);
}

double t_df_logprior(double v) {
  if (!(v > 0.0) || !std::isfinite(v)) return kNegInf;
  double bracket = 0.0;
  if (v > 200.0) {
    // Asymptotic expansion; the direct difference of trigammas cancels badly.
    const double t = 1.0 / v;
    const double t4 = t * t * t * t;
    bracket = t4 * (6.0 + t * (-12.0 + t * (14.0 + t * (-12.0 + t * (22.0 - 60.0 * t)))));
  } else {
    bracket = trigamma(0.5 * v) - trigamma(0.5 * (v + 1.0)) - 2.0 * (v + 3.0) / (v * (v + 1.0) * (v + 1.0));
  }
  if (!(bracket > 0.0)) throw AccuracyError("t_df_logprior: nonpositive trigamma bracket");
  return 0.5 * (std::log(v) - std::log(v + 3.0)) + 0.5 * std::log(bracket);
}

double threshold_logprior(double u, double mean, double sd) {
  if (!(sd > 0.0)) return kNegInf;
  return normal_log_pdf((u - mean) / sd) - std::log(sd);
}

double ztpoisson_rate(double mean) {
  if (!(mean > 1.0)) throw DomainError("ztpoisson_rate: mean must exceed 1");
  auto f = [mean](double lam) { return lam + mean * std::expm1(-lam); };
  std::uintmax_t iters = 200;
  auto tol = boost::math::tools::eps_tolerance<double>(52);
  auto r = boost::math::tools::toms748_solve(f, 1e-12, mean, tol, iters);
  return 0.5 * (r.first + r.second);
}

double ztpoisson_logpmf(double v, double mean) {
  if (!(v >= 1.0) || std::floor(v) != v) return kNegInf;
  const double lam = ztpoisson_rate(mean);
  return v * std::log(lam) - lam - log_gamma(v + 1.0) - std::log(-std::expm1(-lam));
}

double margin_logprior(const MarginalParams& m, const MarginPrior& p) {
  const std::size_t n = m.bulk.size();
  if (p.eta_shape.size() != n || p.mu_shape.size() != n) return kNegInf;
  double lp = dirichlet_one_logpdf(m.bulk.w);
  if (lp == kNegInf) return kNegInf;
  for (std::size_t j = 0; j < n; ++j) {
    const double eta = m.bulk.eta[j];
    const double mu = m.bulk.mu[j];
    if (!(eta > 0.0) || !(mu > 0.0) || !std::isfinite(eta) || !std::isfinite(mu)) return kNegInf;
    if (j > 0 && !(mu > m.bulk.mu[j - 1])) return kNegInf;
    const double c = p.eta_shape[j];
    const double rate = c / p.eta_mean[j];
    lp += c * std::log(rate) - log_gamma(c) + (c - 1.0) * std::log(eta) - rate * eta;
    const double a = p.mu_shape[j];
    const double scale = p.mu_mean[j] * (a - 1.0);
    lp += a * std::log(scale) - log_gamma(a) - (a + 1.0) * std::log(mu) - scale / mu;
  }
  lp += gpd_logprior(m.tail.xi, m.tail.sigma);
  if (!std::isfinite(m.tail.u)) return kNegInf;
  lp += threshold_logprior(m.tail.u, p.u_mean, p.u_sd);
  return lp;
}

double copula_logprior(const CopulaMixture& mix, const PriorConfig& cfg) {
  if (mix.components.empty() || mix.w.size() != mix.components.size()) return kNegInf;
  if (check(mix)) return kNegInf;
  const std::size_t n = mix.size();
  double lp = dirichlet_one_logpdf(mix.w);
  // Ordered draws from n iid priors: n! times the product.
  lp += log_factorial(n);
  const CopulaFamily fam = mix.family();
  for (const CopulaParams& c : mix.components) {
    // Gumbel: uniform on Kendall's tau = 1 - 1/theta. Others: uniform on an interval of length 2.
    lp -= fam == CopulaFamily::Gumbel ? 2.0 * std::log(c.theta) : std::log(2.0);
  }
  const CopulaParams& first = mix.components.front();
  if (has_skew(fam)) lp -= 2.0 * std::log(2.0 * (1.0 - kSkewEpsilon));
  if (fam == CopulaFamily::T) lp += t_df_logprior(first.v);
  if (fam == CopulaFamily::SkewT) lp += ztpoisson_logpmf(first.v, cfg.df_poisson_mean);
  return lp;
}

double log_prior(const ModelParams& theta, const PriorConfig& cfg) {
  double lp = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double m = margin_logprior(theta.margin(i), cfg.margins[static_cast<std::size_t>(i)]);
    if (m == kNegInf) return kNegInf;
    lp += m;
  }
  const double c = copula_logprior(theta.dep, cfg);
  if (c == kNegInf) return kNegInf;
  return lp + c;
}

}  // namespace bivex
