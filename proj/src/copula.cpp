#include "bivex/copula.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/quadrature/tanh_sinh.hpp>

#include "bivex/error.hpp"

namespace bivex {

namespace {

constexpr double kLog2 = 0.69314718055994530942;

double clamp_unit(double u) { return std::clamp(u, kUnitClamp, 1.0 - kUnitClamp); }

// Open-interval clamp for sampled uniforms.
double clamp_sample(double u) {
  return std::clamp(u, std::numeric_limits<double>::min(), std::nextafter(1.0, 0.0));
}

bool is_integer(double v) { return v >= 1.0 && std::floor(v) == v; }

double latent_transform(CopulaFamily family, double u, double v, double lambda) {
  switch (family) {
    case CopulaFamily::Gaussian:
      return normal_quantile(u);
    case CopulaFamily::T:
      return student_t_quantile(u, v);
    case CopulaFamily::SkewNormal:
      return skew_normal_quantile(u, lambda);
    case CopulaFamily::SkewT:
      return skew_t_quantile(u, lambda, v);
    case CopulaFamily::Gumbel:
    case CopulaFamily::FGM:
      return u;
  }
  return u;
}

// P(Z1 <= z1, Z2 <= z2) for the bivariate skew-normal (v = infinity) or skew-t
// built as (X1, X2) | X0 > 0, where corr(X0, Xi) = delta_i. Conditioning on
// X0 = s leaves a bivariate normal (or t with v+1 df) with correlation r.
double skew_bivariate_cdf(double z1, double z2, double delta1, double delta2, double psi,
                          std::optional<double> v) {
  const double s1 = std::sqrt(1.0 - delta1 * delta1);
  const double s2 = std::sqrt(1.0 - delta2 * delta2);
  const double r = std::clamp((psi - delta1 * delta2) / (s1 * s2), -1.0 + 1e-15, 1.0 - 1e-15);
  if (!v) {
    auto integrand = [&](double s) {
      return std::exp(normal_log_pdf(s)) * bvn_cdf((z1 - delta1 * s) / s1, (z2 - delta2 * s) / s2, r);
    };
    const double value =
        boost::math::quadrature::gauss_kronrod<double, 31>::integrate(integrand, 0.0, 9.0, 20, 1e-13);
    return 2.0 * value;
  }
  const double nu = *v;
  const double sv = std::sqrt(nu);
  const double log_norm = log_gamma(0.5 * (nu + 1.0)) - log_gamma(0.5 * nu) - 0.5 * std::log(kPi);
  // s = sqrt(v) cot(phi), phi in (0, pi/2]
  auto integrand = [&](double phi) {
    const double sp = std::sin(phi);
    if (sp <= 0.0) return 0.0;
    const double s = sv * std::cos(phi) / sp;
    const double k = std::sqrt((nu + s * s) / (nu + 1.0));
    const double inner = bvt_cdf((z1 - delta1 * s) / (k * s1), (z2 - delta2 * s) / (k * s2), r, nu + 1.0);
    return std::exp(log_norm + (nu - 1.0) * std::log(sp)) * inner;
  };
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  return 2.0 * integrator.integrate(integrand, 0.0, 0.5 * kPi, 1e-13);
}

}  // namespace

std::string_view to_string(CopulaFamily f) {
  switch (f) {
    case CopulaFamily::Gaussian:
      return "gaussian";
    case CopulaFamily::T:
      return "t";
    case CopulaFamily::SkewNormal:
      return "skew_normal";
    case CopulaFamily::SkewT:
      return "skew_t";
    case CopulaFamily::Gumbel:
      return "gumbel";
    case CopulaFamily::FGM:
      return "fgm";
  }
  return "unknown";
}

CopulaFamily copula_family_from_string(std::string_view name) {
  for (auto f : {CopulaFamily::Gaussian, CopulaFamily::T, CopulaFamily::SkewNormal, CopulaFamily::SkewT,
                 CopulaFamily::Gumbel, CopulaFamily::FGM}) {
    if (to_string(f) == name) return f;
  }
  throw ParameterError("unknown copula family '" + std::string(name) + "'");
}

bool is_elliptical(CopulaFamily f) { return f != CopulaFamily::Gumbel && f != CopulaFamily::FGM; }
bool has_df(CopulaFamily f) { return f == CopulaFamily::T || f == CopulaFamily::SkewT; }
bool has_skew(CopulaFamily f) { return f == CopulaFamily::SkewNormal || f == CopulaFamily::SkewT; }

double CopulaParams::order_key() const { return is_elliptical(family) ? rho : theta; }

SkewDerived skew_derived(double rho, double delta1, double delta2) {
  SkewDerived d{};
  d.lambda1 = delta1 / std::sqrt(1.0 - delta1 * delta1);
  d.lambda2 = delta2 / std::sqrt(1.0 - delta2 * delta2);
  d.psi = rho * std::sqrt(1.0 - delta1 * delta1) * std::sqrt(1.0 - delta2 * delta2) + delta1 * delta2;
  const double disc = 1.0 - d.psi * d.psi - delta1 * delta1 - delta2 * delta2 + 2.0 * d.psi * delta1 * delta2;
  if (!(disc > 0.0) || !(d.psi * d.psi < 1.0)) {
    throw ParameterError("skew parameters give a non positive-definite latent correlation");
  }
  const double denom = std::sqrt((1.0 - d.psi * d.psi) * disc);
  d.alpha1 = (delta1 - delta2 * d.psi) / denom;
  d.alpha2 = (delta2 - delta1 * d.psi) / denom;
  return d;
}

std::optional<std::string> check(const CopulaParams& cp) {
  if (is_elliptical(cp.family)) {
    if (!(std::abs(cp.rho) < 1.0)) return "rho must lie in (-1,1)";
  }
  if (has_df(cp.family)) {
    if (!(cp.v > 0.0) || !std::isfinite(cp.v)) return "degrees of freedom must be positive";
    if (cp.family == CopulaFamily::SkewT && !is_integer(cp.v)) return "skew-t degrees of freedom must be an integer";
  }
  if (has_skew(cp.family)) {
    const double lim = 1.0 - kSkewEpsilon;
    if (!(std::abs(cp.delta1) < lim) || !(std::abs(cp.delta2) < lim)) return "skew parameters must lie in (-1+eps, 1-eps)";
    const double psi = cp.rho * std::sqrt(1.0 - cp.delta1 * cp.delta1) * std::sqrt(1.0 - cp.delta2 * cp.delta2) +
                       cp.delta1 * cp.delta2;
    const double disc =
        1.0 - psi * psi - cp.delta1 * cp.delta1 - cp.delta2 * cp.delta2 + 2.0 * psi * cp.delta1 * cp.delta2;
    if (!(disc > 0.0)) return "skew parameters give a singular latent correlation";
  }
  if (cp.family == CopulaFamily::Gumbel && !(cp.theta >= 1.0 && std::isfinite(cp.theta))) {
    return "Gumbel theta must be >= 1";
  }
  if (cp.family == CopulaFamily::FGM && !(cp.theta >= -1.0 && cp.theta <= 1.0)) return "FGM theta must lie in [-1,1]";
  return std::nullopt;
}

void validate(const CopulaParams& cp) {
  if (auto e = check(cp)) throw ParameterError(*e);
}

std::optional<std::string> check(const CopulaMixture& mix) {
  if (mix.components.empty()) return "copula mixture needs at least one component";
  if (mix.w.size() != mix.components.size()) return "copula weights and components differ in length";
  double total = 0.0;
  for (double w : mix.w) {
    if (!(w >= 0.0)) return "copula weights must be nonnegative";
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) return "copula weights must sum to one";
  const CopulaParams& first = mix.components.front();
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const CopulaParams& c = mix.components[i];
    if (auto e = check(c)) return e;
    if (c.family != first.family) return "all mixture components must share one family";
    if (has_df(c.family) && c.v != first.v) return "mixture components must share the degrees of freedom";
    if (has_skew(c.family) && (c.delta1 != first.delta1 || c.delta2 != first.delta2)) {
      return "mixture components must share the skewness parameters";
    }
    if (i > 0 && !(c.order_key() > mix.components[i - 1].order_key())) {
      return "mixture components must be strictly ordered";
    }
  }
  if (first.family == CopulaFamily::SkewT && mix.size() != 1) return "skew-t mixtures have a single component";
  return std::nullopt;
}

void validate(const CopulaMixture& mix) {
  if (auto e = check(mix)) throw ParameterError(*e);
}

// ---------------------------------------------------------------------------

CopulaEvaluator::CopulaEvaluator(const CopulaMixture& mix)
    : family_(mix.family()),
      v_(mix.components.front().v),
      delta1_(mix.components.front().delta1),
      delta2_(mix.components.front().delta2),
      lambda1_(0.0),
      lambda2_(0.0) {
  validate(mix);
  if (has_skew(family_)) {
    lambda1_ = delta1_ / std::sqrt(1.0 - delta1_ * delta1_);
    lambda2_ = delta2_ / std::sqrt(1.0 - delta2_ * delta2_);
  }
  comps_.reserve(mix.size());
  for (std::size_t i = 0; i < mix.size(); ++i) {
    const CopulaParams& c = mix.components[i];
    Component k{};
    k.log_w = mix.w[i] > 0.0 ? std::log(mix.w[i]) : kNegInf;
    k.rho = c.rho;
    k.theta = c.theta;
    k.one_m_r2 = 1.0 - c.rho * c.rho;
    switch (family_) {
      case CopulaFamily::Gaussian:
        k.log_norm = -0.5 * std::log(k.one_m_r2);
        break;
      case CopulaFamily::T:
        k.log_norm = log_gamma(0.5 * (v_ + 2.0)) + log_gamma(0.5 * v_) - 2.0 * log_gamma(0.5 * (v_ + 1.0)) -
                     0.5 * std::log(k.one_m_r2);
        break;
      case CopulaFamily::SkewNormal:
        k.skew = skew_derived(c.rho, c.delta1, c.delta2);
        k.one_m_r2 = 1.0 - k.skew.psi * k.skew.psi;
        k.log_norm = -0.5 * std::log(k.one_m_r2) - kLog2;
        break;
      case CopulaFamily::SkewT:
        k.skew = skew_derived(c.rho, c.delta1, c.delta2);
        k.one_m_r2 = 1.0 - k.skew.psi * k.skew.psi;
        // log 2 + log t2 normaliser - 2 (log 2 + log t_v normaliser)
        k.log_norm = -kLog2 + log_gamma(0.5 * (v_ + 2.0)) - log_gamma(0.5 * v_) - std::log(v_ * kPi) -
                     0.5 * std::log(k.one_m_r2) -
                     2.0 * (log_gamma(0.5 * (v_ + 1.0)) - log_gamma(0.5 * v_) - 0.5 * std::log(v_ * kPi));
        break;
      case CopulaFamily::Gumbel:
      case CopulaFamily::FGM:
        k.log_norm = 0.0;
        break;
    }
    comps_.push_back(k);
  }
}

double CopulaEvaluator::latent(int which, Probability u) const {
  return latent_transform(family_, clamp_unit(u), v_, which == 0 ? lambda1_ : lambda2_);
}

bool CopulaEvaluator::same_transform(const CopulaMixture& other) const {
  const CopulaParams& c = other.components.front();
  if (c.family != family_) return false;
  if (has_df(family_) && c.v != v_) return false;
  if (has_skew(family_) && (c.delta1 != delta1_ || c.delta2 != delta2_)) return false;
  return true;
}

LogDensity CopulaEvaluator::log_density(double z1, double z2, Probability u1, Probability u2) const {
  // Terms shared by all components.
  double shared = 0.0;
  double gx = 0.0, gy = 0.0, log_gx = 0.0, log_gy = 0.0;
  switch (family_) {
    case CopulaFamily::T:
      shared = 0.5 * (v_ + 1.0) * (std::log1p(z1 * z1 / v_) + std::log1p(z2 * z2 / v_));
      break;
    case CopulaFamily::SkewNormal:
      shared = 0.5 * (z1 * z1 + z2 * z2) - normal_log_cdf(lambda1_ * z1) - normal_log_cdf(lambda2_ * z2);
      break;
    case CopulaFamily::SkewT: {
      const double c1 = student_t_cdf(lambda1_ * z1 * std::sqrt((v_ + 1.0) / (z1 * z1 + v_)), v_ + 1.0);
      const double c2 = student_t_cdf(lambda2_ * z2 * std::sqrt((v_ + 1.0) / (z2 * z2 + v_)), v_ + 1.0);
      shared = 0.5 * (v_ + 1.0) * (std::log1p(z1 * z1 / v_) + std::log1p(z2 * z2 / v_)) - std::log(c1) - std::log(c2);
      break;
    }
    case CopulaFamily::Gumbel:
      gx = -std::log(clamp_unit(u1));
      gy = -std::log(clamp_unit(u2));
      log_gx = std::log(gx);
      log_gy = std::log(gy);
      break;
    default:
      break;
  }

  double m = kNegInf;
  double s = 0.0;
  for (const Component& k : comps_) {
    if (k.log_w == kNegInf) continue;
    double lc = 0.0;
    switch (family_) {
      case CopulaFamily::Gaussian:
        lc = k.log_norm + (2.0 * k.rho * z1 * z2 - k.rho * k.rho * (z1 * z1 + z2 * z2)) / (2.0 * k.one_m_r2);
        break;
      case CopulaFamily::T: {
        const double q = (z1 * z1 + z2 * z2 - 2.0 * k.rho * z1 * z2) / (v_ * k.one_m_r2);
        lc = k.log_norm - 0.5 * (v_ + 2.0) * std::log1p(q) + shared;
        break;
      }
      case CopulaFamily::SkewNormal: {
        const double psi = k.skew.psi;
        const double quad = (z1 * z1 + z2 * z2 - 2.0 * psi * z1 * z2) / (2.0 * k.one_m_r2);
        lc = k.log_norm - quad + normal_log_cdf(k.skew.alpha1 * z1 + k.skew.alpha2 * z2) + shared;
        break;
      }
      case CopulaFamily::SkewT: {
        const double psi = k.skew.psi;
        const double q = (z1 * z1 + z2 * z2 - 2.0 * psi * z1 * z2) / k.one_m_r2;
        const double arg = (k.skew.alpha1 * z1 + k.skew.alpha2 * z2) * std::sqrt((v_ + 2.0) / (q + v_));
        const double tail = student_t_cdf(arg, v_ + 2.0);
        lc = k.log_norm - 0.5 * (v_ + 2.0) * std::log1p(q / v_) + std::log(tail) + shared;
        break;
      }
      case CopulaFamily::Gumbel: {
        const double th = k.theta;
        // A = (gx^th + gy^th)^(1/th), evaluated on the log scale.
        const double la = log_gx * th;
        const double lb = log_gy * th;
        const double lmax = std::max(la, lb);
        const double log_sum = lmax + std::log(std::exp(la - lmax) + std::exp(lb - lmax));
        const double log_a = log_sum / th;
        const double a = std::exp(log_a);
        lc = -a + gx + gy + (th - 1.0) * (log_gx + log_gy) - (2.0 * th - 1.0) * log_a + std::log(a + th - 1.0);
        break;
      }
      case CopulaFamily::FGM: {
        const double x1 = clamp_unit(u1);
        const double x2 = clamp_unit(u2);
        lc = std::log1p(k.theta * (1.0 - 2.0 * x1) * (1.0 - 2.0 * x2));
        break;
      }
    }
    const double t = k.log_w + lc;
    if (std::isnan(t)) return kNegInf;
    if (t > m) {
      s = (m == kNegInf ? 0.0 : s * std::exp(m - t)) + 1.0;
      m = t;
    } else {
      s += std::exp(t - m);
    }
  }
  if (m == kNegInf) return kNegInf;
  return m + std::log(s);
}

// ---------------------------------------------------------------------------

LogDensity copula_logdensity(const CopulaParams& cp, Probability v1, Probability v2) {
  if (!(v1 > 0.0 && v1 < 1.0 && v2 > 0.0 && v2 < 1.0)) {
    throw DomainError("copula_logdensity: arguments must lie in (0,1)");
  }
  CopulaMixture single{{1.0}, {cp}};
  CopulaEvaluator eval(single);
  return eval.log_density(eval.latent(0, v1), eval.latent(1, v2), v1, v2);
}

Probability copula_cdf(const CopulaParams& cp, Probability v1, Probability v2) {
  if (!(v1 >= 0.0 && v1 <= 1.0 && v2 >= 0.0 && v2 <= 1.0)) {
    throw DomainError("copula_cdf: arguments must lie in [0,1]");
  }
  validate(cp);
  if (v1 == 0.0 || v2 == 0.0) return 0.0;
  if (v1 == 1.0) return v2;
  if (v2 == 1.0) return v1;
  const double u1 = clamp_unit(v1);
  const double u2 = clamp_unit(v2);
  double c = 0.0;
  switch (cp.family) {
    case CopulaFamily::Gaussian:
      c = bvn_cdf(normal_quantile(u1), normal_quantile(u2), cp.rho);
      break;
    case CopulaFamily::T:
      c = bvt_cdf(student_t_quantile(u1, cp.v), student_t_quantile(u2, cp.v), cp.rho, cp.v);
      break;
    case CopulaFamily::SkewNormal: {
      const SkewDerived d = skew_derived(cp.rho, cp.delta1, cp.delta2);
      c = skew_bivariate_cdf(skew_normal_quantile(u1, d.lambda1), skew_normal_quantile(u2, d.lambda2), cp.delta1,
                             cp.delta2, d.psi, std::nullopt);
      break;
    }
    case CopulaFamily::SkewT: {
      const SkewDerived d = skew_derived(cp.rho, cp.delta1, cp.delta2);
      c = skew_bivariate_cdf(skew_t_quantile(u1, d.lambda1, cp.v), skew_t_quantile(u2, d.lambda2, cp.v), cp.delta1,
                             cp.delta2, d.psi, cp.v);
      break;
    }
    case CopulaFamily::Gumbel: {
      const double a = std::pow(std::pow(-std::log(u1), cp.theta) + std::pow(-std::log(u2), cp.theta), 1.0 / cp.theta);
      c = std::exp(-a);
      break;
    }
    case CopulaFamily::FGM:
      c = u1 * u2 * (1.0 + cp.theta * (1.0 - u1) * (1.0 - u2));
      break;
  }
  // Frechet bounds
  return std::clamp(c, std::max(0.0, v1 + v2 - 1.0), std::min(v1, v2));
}

Probability copula_survival(const CopulaParams& cp, Probability v1, Probability v2) {
  if (!(v1 >= 0.0 && v1 <= 1.0 && v2 >= 0.0 && v2 <= 1.0)) {
    throw DomainError("copula_survival: arguments must lie in [0,1]");
  }
  validate(cp);
  if (v1 == 1.0 || v2 == 1.0) return 0.0;
  if (v1 == 0.0) return 1.0 - v2;
  if (v2 == 0.0) return 1.0 - v1;
  const double u1 = clamp_unit(v1);
  const double u2 = clamp_unit(v2);
  const double bound = std::min(1.0 - v1, 1.0 - v2);
  double s = 0.0;
  switch (cp.family) {
    case CopulaFamily::Gaussian:
      s = bvn_cdf(-normal_quantile(u1), -normal_quantile(u2), cp.rho);
      break;
    case CopulaFamily::T:
      s = bvt_cdf(-student_t_quantile(u1, cp.v), -student_t_quantile(u2, cp.v), cp.rho, cp.v);
      break;
    case CopulaFamily::FGM:
      s = (1.0 - u1) * (1.0 - u2) * (1.0 + cp.theta * u1 * u2);
      break;
    default:
      s = 1.0 - v1 - v2 + copula_cdf(cp, v1, v2);
      if (s < -1e-10) throw AccuracyError("copula df too inaccurate for the joint survival probability");
      break;
  }
  return std::clamp(s, 0.0, bound);
}

LogDensity mixture_logdensity(const CopulaMixture& mix, Probability v1, Probability v2) {
  if (!(v1 > 0.0 && v1 < 1.0 && v2 > 0.0 && v2 < 1.0)) {
    throw DomainError("mixture_logdensity: arguments must lie in (0,1)");
  }
  CopulaEvaluator eval(mix);
  return eval.log_density(eval.latent(0, v1), eval.latent(1, v2), v1, v2);
}

Probability mixture_cdf(const CopulaMixture& mix, Probability v1, Probability v2) {
  validate(mix);
  double total = 0.0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (mix.w[i] > 0.0) total += mix.w[i] * copula_cdf(mix.components[i], v1, v2);
  }
  return std::clamp(total, 0.0, 1.0);
}

Probability mixture_survival(const CopulaMixture& mix, Probability v1, Probability v2) {
  validate(mix);
  double total = 0.0;
  for (std::size_t i = 0; i < mix.size(); ++i) {
    if (mix.w[i] > 0.0) total += mix.w[i] * copula_survival(mix.components[i], v1, v2);
  }
  return std::clamp(total, 0.0, 1.0);
}

std::vector<std::array<double, 2>> copula_sample(const CopulaMixture& mix, std::size_t n, Rng& rng) {
  validate(mix);
  std::discrete_distribution<std::size_t> pick(mix.w.begin(), mix.w.end());
  std::vector<std::array<double, 2>> out(n);
  for (auto& pair : out) {
    const CopulaParams& c = mix.components[mix.size() == 1 ? 0 : pick(rng)];
    double u1 = 0.0;
    double u2 = 0.0;
    switch (c.family) {
      case CopulaFamily::Gaussian:
      case CopulaFamily::T: {
        const double n1 = standard_normal(rng);
        const double n2 = standard_normal(rng);
        double z1 = n1;
        double z2 = c.rho * n1 + std::sqrt(1.0 - c.rho * c.rho) * n2;
        if (c.family == CopulaFamily::Gaussian) {
          u1 = normal_cdf(z1);
          u2 = normal_cdf(z2);
        } else {
          const double scale = std::sqrt(2.0 * gamma_draw(0.5 * c.v, rng) / c.v);
          z1 /= scale;
          z2 /= scale;
          u1 = student_t_cdf(z1, c.v);
          u2 = student_t_cdf(z2, c.v);
        }
        break;
      }
      case CopulaFamily::SkewNormal:
      case CopulaFamily::SkewT: {
        const SkewDerived d = skew_derived(c.rho, c.delta1, c.delta2);
        // Cholesky factor of [[1, d1, d2], [d1, 1, psi], [d2, psi, 1]].
        const double l10 = c.delta1;
        const double l11 = std::sqrt(1.0 - l10 * l10);
        const double l20 = c.delta2;
        const double l21 = (d.psi - l20 * l10) / l11;
        const double l22 = std::sqrt(std::max(0.0, 1.0 - l20 * l20 - l21 * l21));
        const double e0 = standard_normal(rng);
        const double e1 = standard_normal(rng);
        const double e2 = standard_normal(rng);
        const double x0 = e0;
        double x1 = l10 * e0 + l11 * e1;
        double x2 = l20 * e0 + l21 * e1 + l22 * e2;
        if (x0 < 0.0) {
          x1 = -x1;
          x2 = -x2;
        }
        if (c.family == CopulaFamily::SkewNormal) {
          u1 = skew_normal_cdf(x1, d.lambda1);
          u2 = skew_normal_cdf(x2, d.lambda2);
        } else {
          const double scale = std::sqrt(2.0 * gamma_draw(0.5 * c.v, rng) / c.v);
          u1 = skew_t_cdf(x1 / scale, d.lambda1, c.v);
          u2 = skew_t_cdf(x2 / scale, d.lambda2, c.v);
        }
        break;
      }
      case CopulaFamily::Gumbel: {
        // Marshall-Olkin with a positive stable frailty (Chambers-Mallows-Stuck).
        const double e1 = -std::log(open_uniform(rng));
        const double e2 = -std::log(open_uniform(rng));
        if (c.theta == 1.0) {
          u1 = std::exp(-e1);
          u2 = std::exp(-e2);
          break;
        }
        const double alpha = 1.0 / c.theta;
        const double angle = kPi * open_uniform(rng);
        const double e = -std::log(open_uniform(rng));
        const double stable = std::sin(alpha * angle) / std::pow(std::sin(angle), 1.0 / alpha) *
                              std::pow(std::sin((1.0 - alpha) * angle) / e, (1.0 - alpha) / alpha);
        u1 = std::exp(-std::pow(e1 / stable, alpha));
        u2 = std::exp(-std::pow(e2 / stable, alpha));
        break;
      }
      case CopulaFamily::FGM: {
        u1 = open_uniform(rng);
        const double w = open_uniform(rng);
        const double a = c.theta * (1.0 - 2.0 * u1);
        if (std::abs(a) < 1e-12) {
          u2 = w;
        } else {
          u2 = ((1.0 + a) - std::sqrt((1.0 + a) * (1.0 + a) - 4.0 * a * w)) / (2.0 * a);
        }
        break;
      }
    }
    pair = {clamp_sample(u1), clamp_sample(u2)};
  }
  return out;
}

}  // namespace bivex
