#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <vector>

#include "bivex/error.hpp"
#include "bivex/likelihood_cache.hpp"
#include "bivex/mcmc.hpp"
#include "oracle.hpp"

using namespace bivex;

namespace {

double trunc_normal_oracle(double x, double m, double s, double lo, double hi) {
  if (x <= lo || x >= hi) return 0.0;
  const double a = (lo - m) / s, b = (hi - m) / s;
  // Upper-tail difference keeps precision when the interval lies far above the mean.
  const double z = a > 0.0 ? oracle::normal_cdf(-a) - oracle::normal_cdf(-b) : oracle::normal_cdf(b) - oracle::normal_cdf(a);
  return oracle::normal_pdf((x - m) / s) / (s * z);
}

double dirichlet_oracle(const std::vector<double>& x, const std::vector<double>& a) {
  double lp = std::lgamma(std::accumulate(a.begin(), a.end(), 0.0));
  for (std::size_t i = 0; i < x.size(); ++i) lp += (a[i] - 1.0) * std::log(x[i]) - std::lgamma(a[i]);
  return lp;
}

double gamma_mean_var_oracle(double x, double mean, double var) {
  const double shape = mean * mean / var;
  const double rate = mean / var;
  return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

ModelParams truth_model() {
  ModelParams t;
  t.m1.bulk = {{1.0}, {2.0}, {3.0}};
  t.m1.tail = {0.4, 2.0, 2.5};
  t.m2.bulk = {{0.5, 0.5}, {3.0, 4.0}, {1.0, 4.0}};
  t.m2.tail = {0.1, 1.5, 4.5};
  t.dep = {{1.0}, {{CopulaFamily::Gaussian, 0.5}}};
  return t;
}

Dataset simulate(const ModelParams& t, std::size_t n, std::uint64_t seed) {
  Rng rng(seed);
  return model_sample(t, n, rng);
}

FitConfig small_config(CopulaFamily fam, std::size_t iters, std::size_t burn, std::size_t thin) {
  FitConfig cfg;
  cfg.family = fam;
  cfg.copula_components = 1;
  cfg.gamma_components = {1, 2};
  cfg.schedule.iterations = iters;
  cfg.schedule.burn_in = burn;
  cfg.schedule.thin = thin;
  return cfg;
}

}  // namespace

TEST_CASE("metropolis acceptance rule") {
  Rng rng(1);
  int accepted = 0;
  for (int i = 0; i < 1000; ++i) accepted += mh_accept(-3.0, -3.0, 0.2, 0.2, rng) ? 1 : 0;
  CHECK(accepted == 1000);
  for (int i = 0; i < 100; ++i) CHECK_FALSE(mh_accept(kNegInf, -3.0, 0.0, 0.0, rng));
  for (int i = 0; i < 100; ++i) CHECK(mh_accept(2.0, 1.0, 0.0, 0.0, rng));

  const int n = 100000;
  auto rate = [&](double dpost, double qf, double qb) {
    int a = 0;
    for (int i = 0; i < n; ++i) a += mh_accept(dpost, 0.0, qf, qb, rng) ? 1 : 0;
    return static_cast<double>(a) / n;
  };
  CHECK(std::abs(rate(std::log(0.5), 0.0, 0.0) - 0.5) < 3.0 * oracle::binomial_se(0.5, n));
  // Kernel correction: log q(b) - log q(f) = log 0.25.
  CHECK(std::abs(rate(0.0, std::log(4.0), 0.0) - 0.25) < 3.0 * oracle::binomial_se(0.25, n));
  CHECK(std::abs(rate(std::log(8.0), std::log(4.0), 0.0) - 1.0) == 0.0);
}

TEST_CASE("truncated normal kernel") {
  struct Case {
    double m, s, lo, hi;
  };
  for (const Case& c : {Case{0.2, 0.3, -1.0, 1.0}, Case{0.0, 0.05, 0.5, 0.6}, Case{0.9, 2.0, -1.0, 1.0},
                        Case{1.0, 0.5, 0.0, std::numeric_limits<double>::infinity()}}) {
    for (double x : {c.lo + 0.3 * std::min(1.0, c.hi - c.lo), c.lo + 0.05 * std::min(1.0, c.hi - c.lo)}) {
      const double ref = trunc_normal_oracle(x, c.m, c.s, c.lo, c.hi);
      CHECK(std::abs(truncated_normal_logpdf(x, c.m, c.s, c.lo, c.hi) - std::log(ref)) < 1e-9);
    }
    CHECK(truncated_normal_logpdf(c.lo - 0.1, c.m, c.s, c.lo, c.hi) == kNegInf);
    Rng rng(3);
    std::vector<double> xs;
    for (int i = 0; i < 20000; ++i) {
      const double x = truncated_normal_draw(c.m, c.s, c.lo, c.hi, rng);
      REQUIRE(x > c.lo);
      REQUIRE(x < c.hi);
      xs.push_back(x);
    }
    auto cdf = [&](double x) {
      return oracle::integrate([&](double t) { return trunc_normal_oracle(t, c.m, c.s, c.lo, c.hi); }, c.lo, x, 1e-10);
    };
    std::sort(xs.begin(), xs.end());
    std::vector<double> thin;
    for (std::size_t i = 0; i < xs.size(); i += 10) thin.push_back(xs[i]);
    CHECK(oracle::ks_distance(thin, cdf) < 1.63 / std::sqrt(static_cast<double>(thin.size())));
  }
}

TEST_CASE("ordered proposal stays between neighbours") {
  Rng rng(5);
  const std::vector<double> one = {0.3};
  for (int i = 0; i < 10000; ++i) {
    const auto p = propose_rho(one, 0, 0.8, rng);
    REQUIRE_FALSE(p.forced_reject);
    REQUIRE(p.candidate[0] > -1.0);
    REQUIRE(p.candidate[0] < 1.0);
  }
  const std::vector<double> three = {-0.4, 0.1, 0.5};
  for (int i = 0; i < 10000; ++i) {
    const auto p = propose_rho(three, 1, 0.3, rng);
    REQUIRE(p.candidate[1] > -0.4);
    REQUIRE(p.candidate[1] < 0.5);
    REQUIRE(p.candidate[0] == -0.4);
    REQUIRE(p.candidate[2] == 0.5);
  }
  const auto p = propose_rho(three, 2, 0.2, rng);
  CHECK(std::abs(p.log_q_forward - std::log(trunc_normal_oracle(p.candidate[2], 0.5, 0.2, 0.1, 1.0))) < 1e-9);
  CHECK(std::abs(p.log_q_backward - std::log(trunc_normal_oracle(0.5, p.candidate[2], 0.2, 0.1, 1.0))) < 1e-9);
  const auto q = propose_rho({-0.4, 0.1, 0.5}, 0, 0.2, rng);
  CHECK(std::abs(q.log_q_forward - std::log(trunc_normal_oracle(q.candidate[0], -0.4, 0.2, -1.0, 0.1))) < 1e-9);
  // Empty interval.
  const auto e = propose_ordered({0.2, 0.2, 0.2}, 1, 0.1, -1.0, 1.0, rng);
  CHECK(e.forced_reject);
}

TEST_CASE("dirichlet weight proposal") {
  Rng rng(7);
  CHECK(propose_weights({1.0}, 50.0, rng).candidate == std::vector<double>{1.0});
  const std::vector<double> cur = {0.2, 0.5, 0.3};
  std::vector<std::vector<double>> cols(3);
  for (int i = 0; i < 10000; ++i) {
    const auto p = propose_weights(cur, 50.0, rng);
    const double s = std::accumulate(p.candidate.begin(), p.candidate.end(), 0.0);
    REQUIRE(std::abs(s - 1.0) < 1e-12);
    for (int k = 0; k < 3; ++k) cols[k].push_back(p.candidate[k]);
  }
  for (int k = 0; k < 3; ++k) {
    const auto ms = oracle::batch_mean(cols[k]);
    CHECK(std::abs(ms.mean - cur[k]) < 3.0 * ms.se);
  }
  const auto p = propose_weights(cur, 50.0, rng);
  std::vector<double> af, ab;
  for (double w : cur) af.push_back(50.0 * w);
  for (double w : p.candidate) ab.push_back(50.0 * w);
  CHECK(std::abs(p.log_q_forward - dirichlet_oracle(p.candidate, af)) < 1e-9);
  CHECK(std::abs(p.log_q_backward - dirichlet_oracle(cur, ab)) < 1e-9);
  CHECK(std::abs(dirichlet_logpdf({0.2, 0.8}, {2.0, 3.0}) - dirichlet_oracle({0.2, 0.8}, {2.0, 3.0})) < 1e-12);
  // Zero weights are floored rather than producing a degenerate proposal.
  const auto z = propose_weights({0.0, 1.0}, 50.0, rng);
  CHECK(std::abs(z.candidate[0] + z.candidate[1] - 1.0) < 1e-12);
}

TEST_CASE("degrees of freedom proposals") {
  Rng rng(9);
  std::set<double> seen;
  int forced = 0;
  for (int i = 0; i < 2000; ++i) {
    const auto p = propose_df(1.0, DfMode::Integer, 1.0, rng);
    seen.insert(p.candidate);
    if (p.candidate < 1.0) {
      CHECK(p.forced_reject);
      ++forced;
    } else {
      CHECK(p.log_q_forward == p.log_q_backward);
    }
  }
  CHECK(seen == std::set<double>{-1.0, 0.0, 1.0, 2.0, 3.0});
  CHECK(forced > 0);

  std::vector<double> xs;
  for (int i = 0; i < 10000; ++i) xs.push_back(propose_df(6.0, DfMode::Continuous, 2.0, rng).candidate);
  const auto ms = oracle::batch_mean(xs);
  CHECK(std::abs(ms.mean - 6.0) < 3.0 * ms.se);
  const auto p = propose_df(6.0, DfMode::Continuous, 2.0, rng);
  CHECK(std::abs(p.log_q_forward - gamma_mean_var_oracle(p.candidate, 6.0, 4.0)) < 1e-10);
  CHECK(std::abs(p.log_q_backward - gamma_mean_var_oracle(6.0, p.candidate, 4.0)) < 1e-10);
}

TEST_CASE("log posterior composes likelihood and prior") {
  const ModelParams t = truth_model();
  const Dataset data = simulate(t, 200, 11);
  FitConfig cfg = small_config(CopulaFamily::Gaussian, 10, 5, 1);
  const PriorConfig prior = resolve_prior(data, cfg, t);
  const double lp = log_posterior(t, data, prior);
  CHECK(std::abs(lp - (log_likelihood(t, data) + log_prior(t, prior))) < 1e-12 * std::abs(lp));
  ModelParams bad = t;
  bad.m2.bulk.mu = {4.0, 1.0};
  CHECK(log_posterior(bad, data, prior) == kNegInf);
  bad = t;
  bad.dep.components[0].rho = 1.2;
  CHECK(log_posterior(bad, data, prior) == kNegInf);
}

TEST_CASE("active blocks follow the layout") {
  auto names = [](const ModelParams& t) {
    std::vector<std::string> out;
    for (const auto& b : active_blocks(t)) out.push_back(b.name());
    return out;
  };
  ModelParams g = truth_model();
  const auto gn = names(g);
  CHECK(gn.front() == "rho[1]");
  CHECK(std::count(gn.begin(), gn.end(), "m2_weights") == 1);
  CHECK(std::count(gn.begin(), gn.end(), "m1_weights") == 0);
  CHECK(std::count(gn.begin(), gn.end(), "copula_weights") == 0);
  g.dep = {{1.0}, {{CopulaFamily::SkewT, 0.2, 10.0, 0.1, 0.1}}};
  const auto sn = names(g);
  CHECK(std::count(sn.begin(), sn.end(), "delta1") == 1);
  CHECK(std::count(sn.begin(), sn.end(), "df_integer") == 1);
  g.dep = {{0.5, 0.5}, {{CopulaFamily::Gumbel, 0, 10, 0, 0, 1.2}, {CopulaFamily::Gumbel, 0, 10, 0, 0, 2.0}}};
  const auto un = names(g);
  CHECK(un[0] == "theta[1]");
  CHECK(un[1] == "theta[2]");
  CHECK(un[2] == "copula_weights");
}

TEST_CASE("chain length, determinism and constraint validity") {
  const Dataset data = simulate(truth_model(), 60, 12);
  FitConfig cfg = small_config(CopulaFamily::T, 25000, 5000, 20);
  cfg.copula_components = 2;
  const Chain a = run_chain(data, cfg, 42);
  CHECK(a.size() == 1000);
  CHECK(a.iteration.front() == 5020);
  CHECK(a.iteration.back() == 25000);
  CHECK(a.adaptation.size() == 5000 / 50);
  CHECK(a.adaptation.back().iteration == 5000);
  for (std::size_t i = 0; i < a.size(); ++i) {
    REQUIRE_FALSE(check(a.draws[i]).has_value());
    REQUIRE(std::isfinite(log_prior(a.draws[i], a.prior)));
    REQUIRE(std::abs(a.log_post[i] - log_posterior(a.draws[i], data, a.prior)) < 1e-8 * std::abs(a.log_post[i]));
  }
  // Scales after burn-in equal the last adapted values.
  CHECK(a.final_log_scale == a.adaptation.back().log_scale);

  FitConfig shorter = cfg;
  shorter.schedule.iterations = 3000;
  shorter.schedule.burn_in = 1000;
  shorter.schedule.thin = 10;
  const Chain b1 = run_chain(data, shorter, 7);
  const Chain b2 = run_chain(data, shorter, 7);
  const Chain b3 = run_chain(data, shorter, 8);
  REQUIRE(b1.size() == 200);
  bool same = true, differ = false;
  for (std::size_t i = 0; i < b1.size(); ++i) {
    same = same && flatten(b1.draws[i]) == flatten(b2.draws[i]) && b1.log_post[i] == b2.log_post[i];
    differ = differ || flatten(b1.draws[i]) != flatten(b3.draws[i]);
  }
  CHECK(same);
  CHECK(differ);
}

TEST_CASE("acceptance rates on a reference run") {
  const Dataset data = simulate(truth_model(), 500, 13);
  FitConfig cfg = small_config(CopulaFamily::Gaussian, 6000, 2000, 4);
  const Chain c = run_chain(data, cfg, 3);
  for (std::size_t b = 0; b < c.blocks.size(); ++b) {
    const double rate = static_cast<double>(c.accepted[b]) / static_cast<double>(c.proposed[b]);
    CHECK_MESSAGE(rate > 0.1, c.blocks[b].name() << " " << rate);
    CHECK_MESSAGE(rate < 0.7, c.blocks[b].name() << " " << rate);
  }
}

TEST_CASE("fixed blocks and invalid starts") {
  const ModelParams t = truth_model();
  const Dataset data = simulate(t, 150, 14);
  FitConfig cfg = small_config(CopulaFamily::Gaussian, 400, 200, 2);
  cfg.init = t;
  cfg.fixed_blocks = {"m1_gpd", "rho[1]"};
  const Chain c = run_chain(data, cfg, 1);
  for (const auto& d : c.draws) {
    CHECK(d.m1.tail.xi == t.m1.tail.xi);
    CHECK(d.dep.components[0].rho == t.dep.components[0].rho);
  }
  CHECK(c.draws.back().m2.tail.xi != t.m2.tail.xi);
  cfg.fixed_blocks = {"rho[2]"};
  CHECK_THROWS_AS(run_chain(data, cfg, 1), ConfigError);

  // A start whose tail cannot reach the largest observation.
  ModelParams bad = t;
  bad.m1.tail.xi = -0.45;
  bad.m1.tail.sigma = 0.1;
  cfg.fixed_blocks.clear();
  cfg.init = bad;
  try {
    run_chain(data, cfg, 1);
    FAIL("expected ParameterError");
  } catch (const ParameterError& e) {
    CHECK(std::string(e.what()).find("m1") != std::string::npos);
  }
}

TEST_CASE("sampler matches a grid posterior") {
  // Free parameters: rho and the margin-1 GPD pair (xi, sigma). Everything else is fixed at truth.
  const ModelParams t = truth_model();
  const Dataset data = simulate(t, 600, 15);
  FitConfig cfg = small_config(CopulaFamily::Gaussian, 24000, 2000, 2);
  cfg.init = t;
  for (const auto& b : active_blocks(t)) {
    if (b.name() != "rho[1]" && b.name() != "m1_gpd") cfg.fixed_blocks.push_back(b.name());
  }
  const Chain c = run_chain(data, cfg, 2024);
  double m_rho = 0.0, m_xi = 0.0, m_sigma = 0.0;
  for (const auto& d : c.draws) {
    m_rho += d.dep.components[0].rho;
    m_xi += d.m1.tail.xi;
    m_sigma += d.m1.tail.sigma;
  }
  const double nd = static_cast<double>(c.size());
  m_rho /= nd;
  m_xi /= nd;
  m_sigma /= nd;

  // Dense grid over (rho, xi, log sigma); the log-sigma Jacobian contributes a factor sigma.
  const int n = 36;
  const double r0 = 0.25, r1 = 0.75, x0 = -0.1, x1 = 1.0, l0 = std::log(2.0) - 0.9, l1 = std::log(2.0) + 0.9;
  std::vector<double> logw;
  std::vector<std::array<double, 3>> pts;
  LikelihoodCache cache(data);
  cache.reset(t);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      for (int k = 0; k < n; ++k) {
        ModelParams g = t;
        g.m1.tail.xi = x0 + (x1 - x0) * i / (n - 1);
        g.m1.tail.sigma = std::exp(l0 + (l1 - l0) * j / (n - 1));
        g.dep.components[0].rho = r0 + (r1 - r0) * k / (n - 1);
        const double lp = log_prior(g, c.prior);
        const double ll = cache.evaluate(g);
        if (std::isfinite(ll)) cache.accept();
        logw.push_back(lp + ll + std::log(g.m1.tail.sigma));
        pts.push_back({g.dep.components[0].rho, g.m1.tail.xi, g.m1.tail.sigma});
      }
    }
  }
  const double top = *std::max_element(logw.begin(), logw.end());
  double z = 0.0;
  std::array<double, 3> mean{0.0, 0.0, 0.0};
  for (std::size_t q = 0; q < logw.size(); ++q) {
    const double w = std::exp(logw[q] - top);
    z += w;
    for (int d = 0; d < 3; ++d) mean[d] += w * pts[q][d];
  }
  for (double& m : mean) m /= z;
  MESSAGE("grid " << mean[0] << " " << mean[1] << " " << mean[2] << " chain " << m_rho << " " << m_xi << " "
                  << m_sigma);
  CHECK(std::abs(m_rho - mean[0]) < 0.02 * std::abs(mean[0]));
  CHECK(std::abs(m_xi - mean[1]) < 0.02 * std::abs(mean[1]));
  CHECK(std::abs(m_sigma - mean[2]) < 0.02 * std::abs(mean[2]));
}
