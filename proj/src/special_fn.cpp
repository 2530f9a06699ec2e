#include "bivex/special_fn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

#include <boost/math/distributions/normal.hpp>
#include <boost/math/distributions/students_t.hpp>
#include <boost/math/quadrature/exp_sinh.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <boost/math/special_functions/owens_t.hpp>
#include <boost/math/special_functions/trigamma.hpp>

#include "bivex/error.hpp"

namespace bivex {

namespace {

constexpr double kLogSqrt2Pi = 0.91893853320467274178032973640562;
constexpr double kInvSqrt2 = 0.70710678118654752440084436210485;

// Below this the closed forms for the skew cdfs (a small difference of two
// larger probabilities) lose relative accuracy; the density is integrated instead.
constexpr double kSkewTailSwitch = 1e-6;

// Integral of exp(log_pdf) over (-inf, x], scaled by the density at x so the
// integrand stays O(1) however deep the tail.
template <typename LogPdf>
double lower_tail_mass(const LogPdf& log_pdf, double x) {
  const double l0 = log_pdf(x);
  if (l0 == kNegInf) return 0.0;
  auto g = [&](double s) {
    const double l = log_pdf(x - s);
    return l == kNegInf ? 0.0 : std::exp(l - l0);
  };
  thread_local boost::math::quadrature::exp_sinh<double> integrator;
  return std::exp(l0) * integrator.integrate(g, 1e-13);
}

void require_positive(double v, const char* what) {
  if (!(v > 0.0) || std::isnan(v)) throw DomainError(std::string(what) + " must be positive");
}

void require_open_unit(double p, const char* what) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError(std::string(what) + " must lie in (0,1)");
}

double t_delta_from_lambda(double lambda) { return lambda / std::sqrt(1.0 + lambda * lambda); }

}  // namespace

double log_gamma(double x) {
  if (!(x > 0.0)) throw DomainError("log_gamma: argument must be positive");
  return boost::math::lgamma(x);
}

double trigamma(double x) {
  if (!(x > 0.0)) throw DomainError("trigamma: argument must be positive");
  return boost::math::trigamma(x);
}

double normal_log_pdf(double x) { return -0.5 * x * x - kLogSqrt2Pi; }

Probability normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double normal_log_cdf(double x) {
  if (x > -30.0) return std::log(0.5 * std::erfc(-x * kInvSqrt2));
  // Mills-ratio expansion; erfc underflows below about -37.
  const double x2 = x * x;
  double series = 1.0;
  double term = 1.0;
  for (int k = 1; k <= 6; ++k) {
    term *= -(2.0 * k - 1.0) / x2;
    series += term;
  }
  return normal_log_pdf(x) - std::log(-x) + std::log(series);
}

double normal_quantile(Probability p) {
  require_open_unit(p, "normal_quantile: p");
  return boost::math::quantile(boost::math::normal_distribution<double>(), p);
}

LogDensity student_t_log_pdf(double x, double v) {
  require_positive(v, "student_t_log_pdf: v");
  return boost::math::lgamma(0.5 * (v + 1.0)) - boost::math::lgamma(0.5 * v) -
         0.5 * std::log(v * kPi) - 0.5 * (v + 1.0) * std::log1p(x * x / v);
}

Probability student_t_cdf(double x, double v) {
  require_positive(v, "student_t_cdf: v");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  return boost::math::cdf(boost::math::students_t_distribution<double>(v), x);
}

double student_t_quantile(Probability p, double v) {
  require_positive(v, "student_t_quantile: v");
  require_open_unit(p, "student_t_quantile: p");
  try {
    return boost::math::quantile(boost::math::students_t_distribution<double>(v), p);
  } catch (const std::overflow_error&) {
    // Very small v: the quantile lies beyond the double range.
    return p < 0.5 ? -std::numeric_limits<double>::infinity() : std::numeric_limits<double>::infinity();
  }
}

LogDensity skew_normal_log_pdf(double x, double lambda) {
  return std::log(2.0) + normal_log_pdf(x) + normal_log_cdf(lambda * x);
}

Probability skew_normal_cdf(double x, double lambda) {
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  const double value = normal_cdf(x) - 2.0 * boost::math::owens_t(x, lambda);
  if (x < 0.0 && lambda > 0.0 && value < kSkewTailSwitch) {
    return lower_tail_mass([lambda](double t) { return skew_normal_log_pdf(t, lambda); }, x);
  }
  return std::clamp(value, 0.0, 1.0);
}

double skew_normal_quantile(Probability p, double lambda) {
  require_open_unit(p, "skew_normal_quantile: p");
  if (lambda < 0.0) return -skew_normal_quantile(1.0 - p, -lambda);
  // N(0,1) <= SN(lambda) <= |N(0,1)| stochastically for lambda >= 0.
  const double lo = normal_quantile(p);
  const double hi = normal_quantile(0.5 * (1.0 + p));
  return invert_cdf([lambda](double x) { return skew_normal_cdf(x, lambda); }, p, {lo, hi},
                    [lambda](double x) { return std::exp(skew_normal_log_pdf(x, lambda)); });
}

LogDensity skew_t_log_pdf(double x, double lambda, double v) {
  require_positive(v, "skew_t_log_pdf: v");
  const double arg = lambda * x * std::sqrt((v + 1.0) / (x * x + v));
  const double tail = student_t_cdf(arg, v + 1.0);
  if (tail <= 0.0) return kNegInf;
  return std::log(2.0) + student_t_log_pdf(x, v) + std::log(tail);
}

Probability skew_t_cdf(double x, double lambda, double v) {
  require_positive(v, "skew_t_cdf: v");
  if (std::isinf(x)) return x > 0 ? 1.0 : 0.0;
  // ST(lambda, v) is X1 | X0 > 0 for a bivariate t with correlation delta.
  const double delta = t_delta_from_lambda(lambda);
  const double value = 2.0 * bvt_cdf(x, 0.0, -delta, v);
  if (x < 0.0 && lambda > 0.0 && value < kSkewTailSwitch) {
    return lower_tail_mass([lambda, v](double t) { return skew_t_log_pdf(t, lambda, v); }, x);
  }
  return std::clamp(value, 0.0, 1.0);
}

double skew_t_quantile(Probability p, double lambda, double v) {
  require_positive(v, "skew_t_quantile: v");
  require_open_unit(p, "skew_t_quantile: p");
  if (lambda < 0.0) return -skew_t_quantile(1.0 - p, -lambda, v);
  const double lo = student_t_quantile(p, v);
  double hi = student_t_quantile(0.5 * (1.0 + p), v);
  // For x < 0 the density exceeds c t_v(x), c = 2 T_{v+1}(-lambda sqrt(v+1)),
  // so T_v^-1(p / c) bounds the quantile from above; tight deep in the tail.
  const double c = 2.0 * student_t_cdf(-lambda * std::sqrt(v + 1.0), v + 1.0);
  if (p < c * 0.5) hi = std::min(hi, student_t_quantile(p / c, v));
  return invert_cdf([=](double x) { return skew_t_cdf(x, lambda, v); }, p, {lo, hi},
                    [=](double x) { return std::exp(skew_t_log_pdf(x, lambda, v)); });
}

double invert_cdf(const std::function<double(double)>& cdf, Probability p, Bracket bracket,
                  const std::function<double(double)>& density) {
  require_open_unit(p, "invert_cdf: p");
  constexpr int kMaxSteps = 200;
  // 1e-10 in probability, tightened to relative accuracy in either tail
  // (floored near 1 where F itself is only known to about 1e-16).
  const double tol = p < 0.5 ? 1e-10 * std::min(1.0, 2.0 * p) : std::max(1e-10 * std::min(1.0, 2.0 * (1.0 - p)), 2.3e-16);

  double lo = std::min(bracket.lo, bracket.hi);
  double hi = std::max(bracket.lo, bracket.hi);
  double flo = cdf(lo) - p;
  double fhi = cdf(hi) - p;
  int steps = 0;

  double width = std::max(hi - lo, 1e-3);
  while (flo > 0.0) {
    if (++steps > kMaxSteps) throw ConvergenceError("invert_cdf: bracket expansion failed", lo, hi);
    hi = lo;
    fhi = flo;
    lo -= width;
    width *= 2.0;
    flo = cdf(lo) - p;
  }
  width = std::max(hi - lo, 1e-3);
  while (fhi < 0.0) {
    if (++steps > kMaxSteps) throw ConvergenceError("invert_cdf: bracket expansion failed", lo, hi);
    lo = hi;
    flo = fhi;
    hi += width;
    width *= 2.0;
    fhi = cdf(hi) - p;
  }
  if (std::abs(flo) <= tol) return lo;
  if (std::abs(fhi) <= tol) return hi;

  // Illinois false position, or Newton when a density is available; a
  // bisection step is forced whenever the bracket fails to halve.
  // Newton starts from the better endpoint; false position from the midpoint.
  double x = 0.5 * (lo + hi);
  double fx = 0.0;
  if (density) {
    const bool use_lo = std::abs(flo) < std::abs(fhi);
    x = use_lo ? lo : hi;
    fx = use_lo ? flo : fhi;
  } else {
    fx = cdf(x) - p;
  }
  int side = 0;
  double ref_width = hi - lo;
  int since_check = 0;
  while (++steps <= kMaxSteps) {
    if (std::abs(fx) <= tol) return x;
    if (fx < 0.0) {
      lo = x;
      flo = fx;
      if (side == -1) fhi *= 0.5;
      side = -1;
    } else {
      hi = x;
      fhi = fx;
      if (side == 1) flo *= 0.5;
      side = 1;
    }
    const double next_lo = std::nextafter(lo, hi);
    if (next_lo >= hi) return std::abs(flo) < std::abs(fhi) ? lo : hi;

    double candidate = std::numeric_limits<double>::quiet_NaN();
    if (density) {
      const double slope = density(x);
      const double fval = fx + p;
      if (slope > 0.0 && std::isfinite(slope)) {
        // Lower tail: Newton on log F, which is close to linear there.
        candidate = (p < 0.01 && fval > 0.0) ? x - std::log(fval / p) * fval / slope : x - fx / slope;
      }
    } else {
      candidate = lo - flo * (hi - lo) / (fhi - flo);
    }
    bool bisect = false;
    if (++since_check == 3) {
      bisect = (hi - lo) > 0.5 * ref_width;
      ref_width = hi - lo;
      since_check = 0;
    }
    if (bisect || !(candidate > lo && candidate < hi)) candidate = 0.5 * (lo + hi);
    x = candidate;
    fx = cdf(x) - p;
  }
  throw ConvergenceError("invert_cdf: no convergence within 200 steps", lo, hi);
}

double log_sum_exp(std::span<const double> xs) {
  double m = kNegInf;
  for (double x : xs) m = std::max(m, x);
  if (m == kNegInf) return kNegInf;
  if (std::isinf(m)) return m;
  double s = 0.0;
  for (double x : xs) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace bivex
