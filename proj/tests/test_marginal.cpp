#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bivex/error.hpp"
#include "bivex/marginal.hpp"
#include "oracle.hpp"

using namespace bivex;

namespace {

MarginalParams exp_bulk_with_hu(double hu, double xi, double sigma, double u) {
  // Single Exp component with mean chosen so H(u) = hu.
  MarginalParams m;
  m.bulk = {{1.0}, {1.0}, {-u / std::log1p(-hu)}};
  m.tail = {xi, sigma, u};
  return m;
}

MarginalParams reference_margin() {
  MarginalParams m;
  m.bulk = {{0.6, 0.4}, {2.0, 5.0}, {2.0, 6.0}};
  m.tail = {0.2, 2.0, 7.5};
  return m;
}

const std::vector<double> kTailP = {0.9, 0.95, 0.99, 0.995, 0.999};

}  // namespace

TEST_CASE("gamma mixture pdf and cdf") {
  const GammaMixParams e{{1.0}, {1.0}, {1.0}};
  for (double x : {0.1, 1.0, 3.7}) {
    CHECK(std::abs(gamma_mix_pdf(x, e) - (-x)) < 1e-14);
    CHECK(std::abs(gamma_mix_cdf(x, e) - (1.0 - std::exp(-x))) < 1e-14);
  }
  CHECK(std::abs(gamma_mix_cdf(std::log(2.0), e) - 0.5) < 1e-15);

  const GammaMixParams two{{0.5, 0.5}, {1.0, 1.0}, {1.0, 2.0}};
  const double closed = 0.5 * (1.0 - std::exp(-2.0)) + 0.5 * (1.0 - std::exp(-1.0));
  CHECK(std::abs(gamma_mix_cdf(2.0, two) - closed) < 1e-14);
  CHECK(std::abs(gamma_mix_cdf(2.0, two) - 0.74839263779597249) < 1e-14);
  const double quad = oracle::integrate([&](double x) { return std::exp(gamma_mix_pdf(x, two)); }, 1e-300, 2.0);
  CHECK(std::abs(gamma_mix_cdf(2.0, two) - quad) < 1e-10);

  // Shape/mean parametrization against the textbook rate form.
  const double x = 2.3, mu = 1.7, eta = 3.2;
  const double rate = eta / mu;
  const double direct = std::pow(rate, eta) * std::pow(x, eta - 1.0) * std::exp(-rate * x) / std::tgamma(eta);
  CHECK(std::abs(std::exp(gamma_log_pdf(x, mu, eta)) - direct) < 1e-14);

  CHECK_THROWS_AS(gamma_mix_pdf(0.0, e), DomainError);
  CHECK_THROWS_AS(gamma_mix_cdf(-1.0, e), DomainError);
}

TEST_CASE("gpd cdf and pdf") {
  for (double xi : {-0.3, 0.0, 0.4}) CHECK(gpd_cdf(3.0, {xi, 1.5, 3.0}) == 0.0);
  CHECK(std::abs(gpd_cdf(1.0, {1.0, 1.0, 0.0}) - 0.5) < 1e-15);
  CHECK(std::abs(gpd_cdf(std::log(2.0), {0.0, 1.0, 0.0}) - 0.5) < 1e-15);
  CHECK(std::abs(gpd_cdf(std::log(2.0), {5e-9, 1.0, 0.0}) - 0.5) < 1e-8);

  // Density integrates to the cdf.
  const GpdParams g{0.3, 1.2, 2.0};
  const double q = oracle::integrate([&](double x) { return std::exp(gpd_pdf(x, g)); }, 2.0, 6.0);
  CHECK(std::abs(gpd_cdf(6.0, g) - q) < 1e-11);

  // Negative shape: finite endpoint, clamped df, zero density beyond it.
  const GpdParams neg{-0.5, 2.0, 1.0};
  REQUIRE(neg.upper_endpoint().has_value());
  CHECK(*neg.upper_endpoint() == doctest::Approx(5.0));
  CHECK(gpd_cdf(7.0, neg) == 1.0);
  CHECK(gpd_pdf(7.0, neg) == kNegInf);
  CHECK_FALSE(GpdParams{0.2, 1.0, 0.0}.upper_endpoint().has_value());

  CHECK_THROWS_AS(gpd_cdf(0.5, {0.1, 1.0, 1.0}), SupportError);
  CHECK_THROWS_AS(gpd_pdf(0.5, {0.1, 1.0, 1.0}), SupportError);
}

TEST_CASE("parameter checks") {
  CHECK_FALSE(check(reference_margin()).has_value());
  MarginalParams m = reference_margin();
  m.bulk.mu = {6.0, 2.0};
  CHECK(check(m).has_value());
  m = reference_margin();
  m.bulk.w = {0.7, 0.4};
  CHECK(check(m).has_value());
  m = reference_margin();
  m.bulk.eta[0] = 0.0;
  CHECK(check(m).has_value());
  m = reference_margin();
  m.tail.sigma = 0.0;
  CHECK(check(m).has_value());
  CHECK_THROWS_AS(validate(m), ParameterError);
}

TEST_CASE("mgpd df splices the bulk and the tail") {
  const MarginalParams m = reference_margin();
  const double hu = gamma_mix_cdf(m.tail.u, m.bulk);
  CHECK(mgpd_cdf(m.tail.u, m) == hu);
  // Continuity at u from both sides.
  const double left = mgpd_cdf(std::nextafter(m.tail.u, 0.0), m);
  const double right = mgpd_cdf(std::nextafter(m.tail.u, 100.0), m);
  CHECK(std::abs(left - hu) < 1e-12);
  CHECK(std::abs(right - hu) < 1e-12);
  // Above u: H(u) + (1 - H(u)) P.
  const double x = 11.0;
  CHECK(std::abs(mgpd_cdf(x, m) - (hu + (1.0 - hu) * gpd_cdf(x, m.tail))) < 1e-15);
  CHECK(std::abs(mgpd_pdf(x, m) - (std::log(1.0 - hu) + gpd_pdf(x, m.tail))) < 1e-13);
  CHECK(mgpd_pdf(3.0, m) == gamma_mix_pdf(3.0, m.bulk));

  // Threshold far beyond the bulk mass: the bulk alone describes x <= u.
  MarginalParams deep = m;
  deep.tail.u = 500.0;
  REQUIRE(gamma_mix_cdf(deep.tail.u, deep.bulk) == 1.0);
  for (double y : {0.5, 4.0, 30.0}) CHECK(mgpd_pdf(y, deep) == gamma_mix_pdf(y, deep.bulk));
}

TEST_CASE("mgpd quantile closed form and reference value") {
  const MarginalParams m = exp_bulk_with_hu(0.9, 0.5, 2.0, 10.0);
  const double hu = gamma_mix_cdf(10.0, m.bulk);
  CHECK(std::abs(hu - 0.9) < 1e-14);
  CHECK(mgpd_quantile(hu, m) == 10.0);
  const double q = mgpd_quantile(0.99, m);
  CHECK(std::abs(q - 18.64911) < 1e-5);
  CHECK(std::abs(q - (10.0 + 4.0 * (std::sqrt(10.0) - 1.0))) < 1e-9);
  // Independent inversion of the df by bisection.
  double lo = 10.0, hi = 100.0;
  for (int k = 0; k < 200; ++k) {
    const double mid = 0.5 * (lo + hi);
    (mgpd_cdf(mid, m) < 0.99 ? lo : hi) = mid;
  }
  CHECK(std::abs(q - 0.5 * (lo + hi)) < 1e-6);
  CHECK(std::abs(mgpd_cdf(18.64911064067352, m) - 0.99) < 1e-12);

  // Bulk fallback: Exp(1) bulk with a very high threshold.
  MarginalParams bulk_only;
  bulk_only.bulk = {{1.0}, {1.0}, {1.0}};
  bulk_only.tail = {0.1, 1.0, 50.0};
  CHECK(std::abs(mgpd_quantile(0.5, bulk_only) - std::log(2.0)) < 1e-9);

  CHECK_THROWS_AS(mgpd_quantile(0.0, m), DomainError);
  CHECK_THROWS_AS(mgpd_quantile(1.0, m), DomainError);
}

TEST_CASE("mgpd quantile and df round trip") {
  for (double xi : {-0.3, 0.0, 1e-12, 0.25, 0.8}) {
    MarginalParams m = reference_margin();
    m.tail.xi = xi;
    for (double p : kTailP) CHECK(std::abs(mgpd_cdf(mgpd_quantile(p, m), m) - p) <= 1e-9);
    for (double p : {0.01, 0.2, 0.5, 0.8}) CHECK(std::abs(mgpd_cdf(mgpd_quantile(p, m), m) - p) <= 1e-9);
  }
}

TEST_CASE("mgpd density integrates to one") {
  const MarginalParams m = reference_margin();
  const double top = mgpd_quantile(0.999999, m);
  auto f = [&](double x) { return x > 0.0 ? std::exp(mgpd_pdf(x, m)) : 0.0; };
  const double body = oracle::integrate(f, 0.0, m.tail.u, 1e-13) + oracle::integrate(f, m.tail.u, top, 1e-13);
  CHECK(std::abs(body - 0.999999) < 1e-9);
  CHECK(std::abs(body - 1.0) <= 1e-6 + 1e-9);
  const double all = body + oracle::integrate_from(f, top, 1e-14);
  CHECK(std::abs(all - 1.0) < 1e-9);
}

TEST_CASE("shape near zero switches branch smoothly") {
  MarginalParams a = reference_margin();
  MarginalParams b = reference_margin();
  a.tail.xi = 1e-12;
  b.tail.xi = 0.0;
  double worst = 0.0;
  for (double x = 0.05; x < 80.0; x += 0.05) worst = std::max(worst, std::abs(mgpd_cdf(x, a) - mgpd_cdf(x, b)));
  CHECK(worst < 1e-8);
  // Just either side of the switch.
  a.tail.xi = 0.99e-8;
  b.tail.xi = 1.01e-8;
  for (double x : {8.0, 15.0, 40.0}) CHECK(std::abs(mgpd_cdf(x, a) - mgpd_cdf(x, b)) < 1e-8);
}

TEST_CASE("mgpd sampling") {
  const MarginalParams m = reference_margin();
  std::mt19937_64 rng(2024);
  const auto xs = mgpd_sample(m, 100000, rng);
  CHECK(oracle::ks_distance(xs, [&](double x) { return mgpd_cdf(x, m); }) < 0.01);

  const double tail = 1.0 - gamma_mix_cdf(m.tail.u, m.bulk);
  std::size_t above = 0;
  for (double x : xs) above += x > m.tail.u ? 1 : 0;
  const double frac = static_cast<double>(above) / static_cast<double>(xs.size());
  CHECK(std::abs(frac - tail) < 3.0 * oracle::binomial_se(tail, static_cast<double>(xs.size())));

  std::mt19937_64 r1(99), r2(99);
  CHECK(mgpd_sample(m, 500, r1) == mgpd_sample(m, 500, r2));
}
