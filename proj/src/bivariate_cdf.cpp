// Bivariate normal and Student-t distribution functions.
//
// bvn follows Drezner & Wesolowsky as refined by Genz (Gauss-Legendre rules
// on the arcsin integral, with the Owen-type expansion for |rho| >= 0.925).
// Integer-df bivariate t uses the Dunnett & Sobel (1954) finite series.

#include <array>
#include <cmath>

#include <boost/math/quadrature/tanh_sinh.hpp>

#include "bivex/error.hpp"
#include "bivex/special_fn.hpp"

namespace bivex {

namespace {

constexpr double kTwoPi = 2.0 * kPi;

struct GaussRule {
  std::span<const double> x;
  std::span<const double> w;
};

// Half-rules of Gauss-Legendre with 6, 12 and 20 points on [-1, 1].
constexpr std::array<double, 3> kW6 = {0.1713244923791705, 0.3607615730481384, 0.4679139345726904};
constexpr std::array<double, 3> kX6 = {-0.9324695142031522, -0.6612093864662647, -0.2386191860831970};
constexpr std::array<double, 6> kW12 = {0.04717533638651177, 0.1069393259953183, 0.1600783285433464,
                                        0.2031674267230659,  0.2334925365383547, 0.2491470458134029};
constexpr std::array<double, 6> kX12 = {-0.9815606342467191, -0.9041172563704750, -0.7699026741943050,
                                        -0.5873179542866171, -0.3678314989981802, -0.1252334085114692};
constexpr std::array<double, 10> kW20 = {0.01761400713915212, 0.04060142980038694, 0.06267204833410906,
                                         0.08327674157670475, 0.1019301198172404,  0.1181945319615184,
                                         0.1316886384491766,  0.1420961093183821,  0.1491729864726037,
                                         0.1527533871307259};
constexpr std::array<double, 10> kX20 = {-0.9931285991850949, -0.9639719272779138, -0.9122344282513259,
                                         -0.8391169718222188, -0.7463319064601508, -0.6360536807265150,
                                         -0.5108670019508271, -0.3737060887154196, -0.2277858511416451,
                                         -0.07652652113349733};

GaussRule rule_for(double rho) {
  const double a = std::abs(rho);
  if (a < 0.3) return {kX6, kW6};
  if (a < 0.75) return {kX12, kW12};
  return {kX20, kW20};
}

// P(X > h, Y > k).
double bvn_upper(double h, double k, double r) {
  const GaussRule rule = rule_for(r);
  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      double sn = std::sin(asr * (rule.x[i] + 1.0) / 2.0);
      bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (-rule.x[i] + 1.0) / 2.0);
      bvn += rule.w[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * kTwoPi) + normal_cdf(-h) * normal_cdf(-k);
  }
  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(kTwoPi) * normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) {
      double xs = a * (rule.x[i] + 1.0);
      xs *= xs;
      double rs = std::sqrt(1.0 - xs);
      bvn += a * rule.w[i] *
             (std::exp(-bs / (2.0 * xs) - hk / (1.0 + rs)) / rs -
              std::exp(-(bs / xs + hk) / 2.0) * (1.0 + c * xs * (1.0 + d * xs)));
      xs = as * (-rule.x[i] + 1.0) * (-rule.x[i] + 1.0) / 4.0;
      rs = std::sqrt(1.0 - xs);
      bvn += a * rule.w[i] * std::exp(-(bs / xs + hk) / 2.0) *
             (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)));
    }
    bvn = -bvn / kTwoPi;
  }
  if (r > 0.0) bvn += normal_cdf(-std::max(h, k));
  if (r < 0.0) bvn = -bvn + std::max(0.0, normal_cdf(-h) - normal_cdf(-k));
  return bvn;
}

// P(X < dh, Y < dk) for integer nu.
double bvt_dunnett_sobel(int nu, double dh, double dk, double r) {
  const double snu = std::sqrt(static_cast<double>(nu));
  const double ors = 1.0 - r * r;
  const double hrk = dh - r * dk;
  const double krh = dk - r * dh;
  double xnhk = 0.0;
  double xnkh = 0.0;
  if (std::abs(hrk) + ors > 0.0) {
    xnhk = hrk * hrk / (hrk * hrk + ors * (nu + dk * dk));
    xnkh = krh * krh / (krh * krh + ors * (nu + dh * dh));
  }
  const int hs = hrk >= 0.0 ? 1 : -1;
  const int ks = krh >= 0.0 ? 1 : -1;
  double bvt = 0.0;
  if (nu % 2 == 0) {
    bvt = std::atan2(std::sqrt(ors), -r) / kTwoPi;
    double gmph = dh / std::sqrt(16.0 * (nu + dh * dh));
    double gmpk = dk / std::sqrt(16.0 * (nu + dk * dk));
    double btnckh = 2.0 * std::atan2(std::sqrt(xnkh), std::sqrt(1.0 - xnkh)) / kPi;
    double btpdkh = 2.0 * std::sqrt(xnkh * (1.0 - xnkh)) / kPi;
    double btnchk = 2.0 * std::atan2(std::sqrt(xnhk), std::sqrt(1.0 - xnhk)) / kPi;
    double btpdhk = 2.0 * std::sqrt(xnhk * (1.0 - xnhk)) / kPi;
    for (int j = 1; j <= nu / 2; ++j) {
      bvt += gmph * (1.0 + ks * btnckh);
      bvt += gmpk * (1.0 + hs * btnchk);
      btnckh += btpdkh;
      btpdkh = 2.0 * j * btpdkh * (1.0 - xnkh) / (2.0 * j + 1.0);
      btnchk += btpdhk;
      btpdhk = 2.0 * j * btpdhk * (1.0 - xnhk) / (2.0 * j + 1.0);
      gmph = gmph * (2.0 * j - 1.0) / (2.0 * j * (1.0 + dh * dh / nu));
      gmpk = gmpk * (2.0 * j - 1.0) / (2.0 * j * (1.0 + dk * dk / nu));
    }
  } else {
    const double qhrk = std::sqrt(dh * dh + dk * dk - 2.0 * r * dh * dk + nu * ors);
    const double hkrn = dh * dk + r * nu;
    const double hkn = dh * dk - nu;
    const double hpk = dh + dk;
    bvt = std::atan2(-snu * (hkn * qhrk + hpk * hkrn), hkn * hkrn - nu * hpk * qhrk) / kTwoPi;
    if (bvt < -1e-15) bvt += 1.0;
    double gmph = dh / (kTwoPi * snu * (1.0 + dh * dh / nu));
    double gmpk = dk / (kTwoPi * snu * (1.0 + dk * dk / nu));
    double btnckh = std::sqrt(xnkh);
    double btpdkh = btnckh;
    double btnchk = std::sqrt(xnhk);
    double btpdhk = btnchk;
    for (int j = 1; j <= (nu - 1) / 2; ++j) {
      bvt += gmph * (1.0 + ks * btnckh);
      bvt += gmpk * (1.0 + hs * btnchk);
      btpdkh = (2.0 * j - 1.0) * btpdkh * (1.0 - xnkh) / (2.0 * j);
      btnckh += btpdkh;
      btpdhk = (2.0 * j - 1.0) * btpdhk * (1.0 - xnhk) / (2.0 * j);
      btnchk += btpdhk;
      gmph = 2.0 * j * gmph / ((2.0 * j + 1.0) * (1.0 + dh * dh / nu));
      gmpk = 2.0 * j * gmpk / ((2.0 * j + 1.0) * (1.0 + dk * dk / nu));
    }
  }
  return bvt;
}

// Conditional representation: T2 | T1 = s is t_{v+1} with scale
// sqrt((1-rho^2)(v+s^2)/(v+1)). Integrated over s = -sqrt(v) cot(phi).
double bvt_quadrature(double a, double b, double rho, double v) {
  thread_local boost::math::quadrature::tanh_sinh<double> integrator;
  const double sv = std::sqrt(v);
  const double log_norm = log_gamma(0.5 * (v + 1.0)) - log_gamma(0.5 * v) - 0.5 * std::log(kPi);
  const double phi_max = std::atan2(a, sv) + 0.5 * kPi;
  const double one_m_r2 = 1.0 - rho * rho;
  auto integrand = [&](double phi) {
    const double sp = std::sin(phi);
    if (sp <= 0.0) return 0.0;
    const double s = -sv * std::cos(phi) / sp;
    const double scale = std::sqrt(one_m_r2 * (v + s * s) / (v + 1.0));
    const double inner = student_t_cdf((b - rho * s) / scale, v + 1.0);
    return std::exp(log_norm + (v - 1.0) * std::log(sp)) * inner;
  };
  if (phi_max <= 0.0) return 0.0;
  return integrator.integrate(integrand, 0.0, phi_max, 1e-12);
}

bool is_integer_df(double v) { return v >= 1.0 && v < 2147483647.0 && std::floor(v) == v; }

}  // namespace

Probability bvn_cdf(double z1, double z2, double rho) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("bvn_cdf: |rho| must be < 1");
  if (std::isnan(z1) || std::isnan(z2)) throw DomainError("bvn_cdf: NaN limit");
  if (z1 == -INFINITY || z2 == -INFINITY) return 0.0;
  if (z1 == INFINITY) return normal_cdf(z2);
  if (z2 == INFINITY) return normal_cdf(z1);
  const double p = bvn_upper(-z1, -z2, rho);
  return std::clamp(p, 0.0, std::min(normal_cdf(z1), normal_cdf(z2)));
}

Probability bvt_cdf(double z1, double z2, double rho, double v) {
  if (!(std::abs(rho) < 1.0)) throw DomainError("bvt_cdf: |rho| must be < 1");
  if (!(v > 0.0)) throw DomainError("bvt_cdf: v must be positive");
  if (std::isnan(z1) || std::isnan(z2)) throw DomainError("bvt_cdf: NaN limit");
  if (z1 == -INFINITY || z2 == -INFINITY) return 0.0;
  if (z1 == INFINITY) return student_t_cdf(z2, v);
  if (z2 == INFINITY) return student_t_cdf(z1, v);
  double p = is_integer_df(v) ? bvt_dunnett_sobel(static_cast<int>(v), z1, z2, rho)
                              : bvt_quadrature(z1, z2, rho, v);
  return std::clamp(p, 0.0, std::min(student_t_cdf(z1, v), student_t_cdf(z2, v)));
}

}  // namespace bivex
