#include "bivex/mcmc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "bivex/error.hpp"
#include "bivex/likelihood_cache.hpp"

namespace bivex {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kWeightFloor = 1e-6;

std::string indexed(const std::string& base, int i) { return base + "[" + std::to_string(i + 1) + "]"; }
std::string margin_tag(int m) { return "m" + std::to_string(m + 1) + "_"; }

double gamma_logpdf_rate(double x, double shape, double rate) {
  if (!(x > 0.0) || !(shape > 0.0) || !(rate > 0.0) || !std::isfinite(shape)) return kNegInf;
  return shape * std::log(rate) - log_gamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
}

// log of a Gamma(shape, 1) deviate; stays finite for tiny shapes.
double log_gamma_draw(double shape, Rng& rng) {
  if (shape >= 1.0) return std::log(gamma_draw(shape, rng));
  const double g = gamma_draw(shape + 1.0, rng);
  return std::log(g) + std::log(open_uniform(rng)) / shape;
}

std::vector<double> copula_keys(const CopulaMixture& mix) {
  std::vector<double> k(mix.size());
  for (std::size_t i = 0; i < mix.size(); ++i) k[i] = mix.components[i].order_key();
  return k;
}

void set_key(CopulaParams& c, double key) {
  if (is_elliptical(c.family)) {
    c.rho = key;
  } else {
    c.theta = key;
  }
}

// Type-7 quantile of sorted data.
double sorted_quantile(const std::vector<double>& s, double p) {
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

std::vector<double> ranks(const std::vector<double>& x) {
  std::vector<std::size_t> idx(x.size());
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return x[a] < x[b]; });
  std::vector<double> r(x.size());
  for (std::size_t k = 0; k < idx.size(); ++k) r[idx[k]] = static_cast<double>(k);
  return r;
}

double spearman(const Dataset& data) {
  const auto r1 = ranks(data.column(0));
  const auto r2 = ranks(data.column(1));
  const double n = static_cast<double>(r1.size());
  const double mean = 0.5 * (n - 1.0);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < r1.size(); ++k) {
    sxy += (r1[k] - mean) * (r2[k] - mean);
    sxx += (r1[k] - mean) * (r1[k] - mean);
    syy += (r2[k] - mean) * (r2[k] - mean);
  }
  if (sxx <= 0.0 || syy <= 0.0) return 0.0;
  return sxy / std::sqrt(sxx * syy);
}

// One-dimensional k-means on sorted data, seeded at evenly spaced quantiles.
GammaMixParams kmeans_bulk(const std::vector<double>& sorted, std::size_t k) {
  std::vector<double> centre(k);
  for (std::size_t j = 0; j < k; ++j) {
    centre[j] = sorted_quantile(sorted, (static_cast<double>(j) + 0.5) / static_cast<double>(k));
  }
  std::vector<std::size_t> label(sorted.size(), 0);
  for (int iter = 0; iter < 100; ++iter) {
    bool changed = false;
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      std::size_t best = 0;
      for (std::size_t j = 1; j < k; ++j) {
        if (std::abs(sorted[i] - centre[j]) < std::abs(sorted[i] - centre[best])) best = j;
      }
      if (best != label[i]) changed = true;
      label[i] = best;
    }
    std::vector<double> sum(k, 0.0);
    std::vector<std::size_t> count(k, 0);
    for (std::size_t i = 0; i < sorted.size(); ++i) {
      sum[label[i]] += sorted[i];
      ++count[label[i]];
    }
    for (std::size_t j = 0; j < k; ++j) {
      if (count[j] > 0) centre[j] = sum[j] / static_cast<double>(count[j]);
    }
    if (!changed && iter > 0) break;
  }
  GammaMixParams g;
  g.w.assign(k, 0.0);
  g.mu.assign(k, 0.0);
  g.eta.assign(k, 2.0);
  std::vector<double> sum(k, 0.0), sum2(k, 0.0);
  std::vector<std::size_t> count(k, 0);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    sum[label[i]] += sorted[i];
    sum2[label[i]] += sorted[i] * sorted[i];
    ++count[label[i]];
  }
  const double total = static_cast<double>(sorted.size());
  for (std::size_t j = 0; j < k; ++j) {
    const double c = static_cast<double>(count[j]);
    g.w[j] = std::max(c / total, 0.01);
    if (count[j] == 0) {
      g.mu[j] = centre[j];
      continue;
    }
    const double m = sum[j] / c;
    g.mu[j] = m;
    if (count[j] > 1) {
      const double var = std::max((sum2[j] - c * m * m) / (c - 1.0), 1e-12);
      g.eta[j] = std::clamp(m * m / var, 0.5, 200.0);
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    if (!(g.mu[j] > 0.0)) g.mu[j] = sorted.front() > 0.0 ? sorted.front() : 1e-3;
    if (j > 0 && !(g.mu[j] > g.mu[j - 1])) g.mu[j] = g.mu[j - 1] * 1.05;
  }
  const double wsum = std::accumulate(g.w.begin(), g.w.end(), 0.0);
  for (double& w : g.w) w /= wsum;
  return g;
}

std::string describe_violation(const ModelParams& theta, const PriorConfig& prior, const Dataset& data) {
  for (int i = 0; i < 2; ++i) {
    if (auto e = check(theta.margin(i))) return margin_tag(i) + "parameters (" + *e + ")";
    if (margin_logprior(theta.margin(i), prior.margins[static_cast<std::size_t>(i)]) == kNegInf) {
      return margin_tag(i) + "prior";
    }
  }
  if (auto e = check(theta.dep)) return "copula parameters (" + *e + ")";
  if (copula_logprior(theta.dep, prior) == kNegInf) return "copula prior";
  for (int i = 0; i < 2; ++i) {
    for (const auto& p : data.pairs) {
      if (mgpd_pdf(p[static_cast<std::size_t>(i)], theta.margin(i)) == kNegInf) {
        return margin_tag(i) + "gpd (data outside the support)";
      }
    }
  }
  return "copula likelihood";
}

}  // namespace

std::string BlockId::name() const {
  const std::string pre = margin >= 0 ? margin_tag(margin) : std::string();
  switch (kind) {
    case BlockKind::Rho:
      return indexed("rho", index);
    case BlockKind::Theta:
      return indexed("theta", index);
    case BlockKind::CopulaWeights:
      return "copula_weights";
    case BlockKind::Delta1:
      return "delta1";
    case BlockKind::Delta2:
      return "delta2";
    case BlockKind::DfContinuous:
      return "df";
    case BlockKind::DfInteger:
      return "df_integer";
    case BlockKind::MarginMu:
      return pre + indexed("mu", index);
    case BlockKind::MarginEta:
      return pre + indexed("eta", index);
    case BlockKind::MarginWeights:
      return pre + "weights";
    case BlockKind::MarginGpd:
      return pre + "gpd";
    case BlockKind::MarginThreshold:
      return pre + "threshold";
  }
  return "unknown";
}

bool BlockId::adaptive() const {
  return kind != BlockKind::CopulaWeights && kind != BlockKind::MarginWeights && kind != BlockKind::DfInteger;
}

std::vector<BlockId> active_blocks(const ModelParams& theta) {
  std::vector<BlockId> out;
  const CopulaFamily fam = theta.dep.family();
  const int n = static_cast<int>(theta.dep.size());
  for (int i = 0; i < n; ++i) out.push_back({is_elliptical(fam) ? BlockKind::Rho : BlockKind::Theta, -1, i});
  if (n > 1) out.push_back({BlockKind::CopulaWeights});
  if (has_skew(fam)) {
    out.push_back({BlockKind::Delta1});
    out.push_back({BlockKind::Delta2});
  }
  if (fam == CopulaFamily::T) out.push_back({BlockKind::DfContinuous});
  if (fam == CopulaFamily::SkewT) out.push_back({BlockKind::DfInteger});
  for (int m = 0; m < 2; ++m) {
    const int nb = static_cast<int>(theta.margin(m).bulk.size());
    for (int j = 0; j < nb; ++j) out.push_back({BlockKind::MarginMu, m, j});
    for (int j = 0; j < nb; ++j) out.push_back({BlockKind::MarginEta, m, j});
    if (nb > 1) out.push_back({BlockKind::MarginWeights, m});
    out.push_back({BlockKind::MarginGpd, m});
    out.push_back({BlockKind::MarginThreshold, m});
  }
  return out;
}

ProposalScales initial_scales(const std::vector<BlockId>& blocks, const ModelParams& init, const PriorConfig& prior,
                              double dirichlet_concentration) {
  ProposalScales s;
  s.dirichlet_concentration = dirichlet_concentration;
  for (const BlockId& b : blocks) {
    double sd = 1.0;
    switch (b.kind) {
      case BlockKind::Rho:
        sd = 0.05;
        break;
      case BlockKind::Theta:
        sd = 0.1;
        break;
      case BlockKind::Delta1:
      case BlockKind::Delta2:
        sd = 0.1;
        break;
      case BlockKind::DfContinuous:
        sd = 0.5 * init.dep.components.front().v;
        break;
      case BlockKind::MarginMu:
        sd = 0.05 * init.margin(b.margin).bulk.mu[static_cast<std::size_t>(b.index)];
        break;
      case BlockKind::MarginEta:
        sd = 0.1;
        break;
      case BlockKind::MarginGpd:
        sd = 0.05;
        break;
      case BlockKind::MarginThreshold:
        sd = 0.5 * prior.margins[static_cast<std::size_t>(b.margin)].u_sd;
        break;
      default:
        sd = 1.0;
        break;
    }
    s.log_scale.push_back(std::log(sd));
  }
  return s;
}

bool mh_accept(double log_post_prop, double log_post_cur, double log_q_forward, double log_q_backward, Rng& rng) {
  if (std::isnan(log_post_prop) || log_post_prop == kNegInf) return false;
  const double log_r = log_post_prop - log_post_cur + log_q_backward - log_q_forward;
  if (std::isnan(log_r)) return false;
  if (log_r >= 0.0) return true;
  return std::log(open_uniform(rng)) < log_r;
}

namespace {

// log P(a < Z < b) for standard normal Z with 0 <= a < b, computed from upper tails.
double upper_tail_log_mass(double a, double b) {
  const double lqa = normal_log_cdf(-a);
  const double lqb = b == kInf ? kNegInf : normal_log_cdf(-b);
  return lqa + std::log1p(-std::exp(lqb - lqa));
}

// Standard normal restricted to (a, b) with a >= 0.
double upper_tail_draw(double a, double b, Rng& rng) {
  if (a < 37.0) {
    const double qa = normal_cdf(-a);
    const double qb = b == kInf ? 0.0 : normal_cdf(-b);
    const double q = qb + open_uniform(rng) * (qa - qb);
    if (q > 0.0 && q < 1.0) {
      const double z = -normal_quantile(q);
      if (z > a && z < b) return z;
    }
  }
  // Exponential rejection sampler with the optimal rate for the lower bound a.
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  for (;;) {
    const double z = a - std::log(open_uniform(rng)) / rate;
    if (z >= b) continue;
    if (std::log(open_uniform(rng)) <= -0.5 * (z - rate) * (z - rate)) return z;
  }
}

}  // namespace

double truncated_normal_logpdf(double x, double mean, double sd, double lo, double hi) {
  if (!(x > lo && x < hi) || !(sd > 0.0)) return kNegInf;
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  double log_mass = 0.0;
  if (a >= 0.0) {
    log_mass = upper_tail_log_mass(a, b);
  } else if (b <= 0.0) {
    log_mass = upper_tail_log_mass(-b, -a);
  } else {
    log_mass = std::log((b == kInf ? 1.0 : normal_cdf(b)) - (a == -kInf ? 0.0 : normal_cdf(a)));
  }
  if (!std::isfinite(log_mass)) return kNegInf;
  return normal_log_pdf((x - mean) / sd) - std::log(sd) - log_mass;
}

double truncated_normal_draw(double mean, double sd, double lo, double hi, Rng& rng) {
  const double a = (lo - mean) / sd;
  const double b = (hi - mean) / sd;
  if (a >= 0.0) return mean + sd * upper_tail_draw(a, b, rng);
  if (b <= 0.0) return mean - sd * upper_tail_draw(-b, -a, rng);
  const double pa = a == -kInf ? 0.0 : normal_cdf(a);
  const double pb = b == kInf ? 1.0 : normal_cdf(b);
  const double p = pa + open_uniform(rng) * (pb - pa);
  if (!(p > 0.0 && p < 1.0)) return mean;
  return mean + sd * normal_quantile(p);
}

double dirichlet_logpdf(const std::vector<double>& x, const std::vector<double>& alpha) {
  double total = 0.0;
  double lp = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) return kNegInf;
    total += alpha[i];
    lp += (alpha[i] - 1.0) * std::log(x[i]) - log_gamma(alpha[i]);
  }
  return lp + log_gamma(total);
}

Proposal<std::vector<double>> propose_ordered(const std::vector<double>& current, std::size_t i, double scale,
                                              double lower, double upper, Rng& rng) {
  Proposal<std::vector<double>> out{current};
  const double lo = i > 0 ? current[i - 1] : lower;
  const double hi = i + 1 < current.size() ? current[i + 1] : upper;
  if (!(lo < hi)) {
    out.forced_reject = true;
    return out;
  }
  const double x0 = current[i];
  const double x1 = truncated_normal_draw(x0, scale, lo, hi, rng);
  if (!(x1 > lo && x1 < hi)) {
    out.forced_reject = true;
    return out;
  }
  out.candidate[i] = x1;
  out.log_q_forward = truncated_normal_logpdf(x1, x0, scale, lo, hi);
  out.log_q_backward = truncated_normal_logpdf(x0, x1, scale, lo, hi);
  if (out.log_q_forward == kNegInf || out.log_q_backward == kNegInf) out.forced_reject = true;
  return out;
}

Proposal<std::vector<double>> propose_rho(const std::vector<double>& current, std::size_t i, double scale, Rng& rng) {
  return propose_ordered(current, i, scale, -1.0, 1.0, rng);
}

Proposal<std::vector<double>> propose_weights(const std::vector<double>& current, double concentration, Rng& rng) {
  Proposal<std::vector<double>> out{current};
  const std::size_t n = current.size();
  if (n == 1) {
    out.candidate = {1.0};
    return out;
  }
  std::vector<double> alpha(n);
  for (std::size_t i = 0; i < n; ++i) alpha[i] = concentration * std::max(current[i], kWeightFloor);
  std::vector<double> lg(n);
  for (std::size_t i = 0; i < n; ++i) lg[i] = log_gamma_draw(alpha[i], rng);
  const double lse = log_sum_exp(lg);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    out.candidate[i] = std::exp(lg[i] - lse);
    total += out.candidate[i];
  }
  for (double& w : out.candidate) {
    w /= total;
    if (!(w > 0.0) || !std::isfinite(w)) out.forced_reject = true;
  }
  if (out.forced_reject) return out;
  std::vector<double> back(n);
  for (std::size_t i = 0; i < n; ++i) back[i] = concentration * std::max(out.candidate[i], kWeightFloor);
  out.log_q_forward = dirichlet_logpdf(out.candidate, alpha);
  out.log_q_backward = dirichlet_logpdf(current, back);
  if (!std::isfinite(out.log_q_forward) || !std::isfinite(out.log_q_backward)) out.forced_reject = true;
  return out;
}

Proposal<double> propose_df(double current, DfMode mode, double scale, Rng& rng) {
  Proposal<double> out{current};
  if (mode == DfMode::Integer) {
    std::uniform_int_distribution<int> step(-2, 2);
    out.candidate = current + static_cast<double>(step(rng));
    if (out.candidate < 1.0) out.forced_reject = true;
    return out;
  }
  const double var = scale * scale;
  const double shape = current * current / var;
  const double rate = current / var;
  const double cand = gamma_draw(shape, rng) / rate;
  out.candidate = cand;
  if (!(cand > 0.0) || !std::isfinite(cand)) {
    out.forced_reject = true;
    return out;
  }
  out.log_q_forward = gamma_logpdf_rate(cand, shape, rate);
  out.log_q_backward = gamma_logpdf_rate(current, cand * cand / var, cand / var);
  if (!std::isfinite(out.log_q_forward) || !std::isfinite(out.log_q_backward)) out.forced_reject = true;
  return out;
}

double log_posterior(const ModelParams& theta, const Dataset& data, const PriorConfig& prior) {
  if (check(theta)) return kNegInf;
  const double lp = log_prior(theta, prior);
  if (lp == kNegInf) return kNegInf;
  const double ll = log_likelihood(theta, data);
  if (ll == kNegInf) return kNegInf;
  return lp + ll;
}

ModelParams initial_params(const Dataset& data, const FitConfig& cfg) {
  validate(data);
  ModelParams theta;
  for (int i = 0; i < 2; ++i) {
    std::vector<double> s = data.column(i);
    std::sort(s.begin(), s.end());
    const auto& spec = cfg.prior[static_cast<std::size_t>(i)];
    const double u = spec.u_mean ? *spec.u_mean : sorted_quantile(s, 0.9);
    std::vector<double> bulk;
    for (double x : s) {
      if (x <= u) bulk.push_back(x);
    }
    if (bulk.size() < cfg.gamma_components[static_cast<std::size_t>(i)]) bulk = s;
    MarginalParams& m = theta.margin(i);
    m.bulk = kmeans_bulk(bulk, cfg.gamma_components[static_cast<std::size_t>(i)]);
    m.tail.u = u;

    std::vector<double> exc;
    for (double x : s) {
      if (x > u) exc.push_back(x - u);
    }
    double xi = 0.1;
    double sigma = std::max(1e-3, 0.1 * std::abs(u));
    if (exc.size() >= 3) {
      const double c = static_cast<double>(exc.size());
      const double mean = std::accumulate(exc.begin(), exc.end(), 0.0) / c;
      double var = 0.0;
      for (double y : exc) var += (y - mean) * (y - mean);
      var /= (c - 1.0);
      if (var > 0.0) {
        const double r = mean * mean / var;
        xi = std::clamp(0.5 * (1.0 - r), -0.2, 0.5);
        sigma = std::max(0.5 * mean * (r + 1.0), 1e-6);
      }
      const double max_exc = *std::max_element(exc.begin(), exc.end());
      if (xi < 0.0) sigma = std::max(sigma, -xi * max_exc * 1.1);
    }
    m.tail.xi = xi;
    m.tail.sigma = sigma;
  }

  const std::size_t n = cfg.copula_components;
  const double rs = spearman(data);
  const double rho0 = std::clamp(2.0 * std::sin(kPi * rs / 6.0), -0.9, 0.9);
  theta.dep.w.assign(n, 1.0 / static_cast<double>(n));
  theta.dep.components.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    CopulaParams& c = theta.dep.components[j];
    c.family = cfg.family;
    const double offset = 0.1 * (static_cast<double>(j) - 0.5 * static_cast<double>(n - 1));
    c.rho = std::clamp(rho0 + offset, -0.95, 0.95);
    c.v = 10.0;
    c.delta1 = 0.0;
    c.delta2 = 0.0;
    if (cfg.family == CopulaFamily::Gumbel) {
      const double tau = std::max(2.0 / kPi * std::asin(rho0), 0.05);
      c.theta = 1.0 / (1.0 - tau) * (1.0 + 0.1 * static_cast<double>(j));
    } else if (cfg.family == CopulaFamily::FGM) {
      c.theta = std::clamp(3.0 * rs + offset * 2.0, -0.95, 0.95);
    }
  }
  // Keep the ordering strict after clamping.
  for (std::size_t j = 1; j < n; ++j) {
    CopulaParams& c = theta.dep.components[j];
    const double prev = theta.dep.components[j - 1].order_key();
    if (!(c.order_key() > prev)) set_key(c, prev + 0.01);
  }
  return theta;
}

PriorConfig resolve_prior(const Dataset& data, const FitConfig& cfg, const ModelParams& init) {
  PriorConfig p;
  for (int i = 0; i < 2; ++i) {
    const auto& spec = cfg.prior[static_cast<std::size_t>(i)];
    MarginPrior mp = default_margin_prior(data.column(i), init.margin(i).bulk);
    if (spec.eta_shape) mp.eta_shape = *spec.eta_shape;
    if (spec.eta_mean) mp.eta_mean = *spec.eta_mean;
    if (spec.mu_shape) mp.mu_shape = *spec.mu_shape;
    if (spec.mu_mean) mp.mu_mean = *spec.mu_mean;
    if (spec.u_mean) mp.u_mean = *spec.u_mean;
    if (spec.u_sd) mp.u_sd = *spec.u_sd;
    p.margins[static_cast<std::size_t>(i)] = mp;
  }
  p.df_poisson_mean = cfg.df_poisson_mean;
  p.phi_c = cfg.phi_c;
  if (auto e = check(p, init)) throw ConfigError(*e);
  return p;
}

namespace {

Proposal<ModelParams> propose_block(const BlockId& b, const ModelParams& cur, double scale, double concentration,
                                    Rng& rng) {
  Proposal<ModelParams> out{cur};
  ModelParams& cand = out.candidate;
  auto take = [&out](const auto& p) {
    out.log_q_forward = p.log_q_forward;
    out.log_q_backward = p.log_q_backward;
    out.forced_reject = p.forced_reject;
  };
  switch (b.kind) {
    case BlockKind::Rho:
    case BlockKind::Theta: {
      const auto keys = copula_keys(cur.dep);
      double lo = -1.0, hi = 1.0;
      if (cur.dep.family() == CopulaFamily::Gumbel) {
        lo = 1.0;
        hi = kInf;
      }
      const auto p = propose_ordered(keys, static_cast<std::size_t>(b.index), scale, lo, hi, rng);
      take(p);
      set_key(cand.dep.components[static_cast<std::size_t>(b.index)], p.candidate[static_cast<std::size_t>(b.index)]);
      break;
    }
    case BlockKind::CopulaWeights: {
      const auto p = propose_weights(cur.dep.w, concentration, rng);
      take(p);
      cand.dep.w = p.candidate;
      break;
    }
    case BlockKind::Delta1:
    case BlockKind::Delta2: {
      const double lim = 1.0 - kSkewEpsilon;
      const double x0 = b.kind == BlockKind::Delta1 ? cur.dep.components.front().delta1 : cur.dep.components.front().delta2;
      const auto p = propose_ordered({x0}, 0, scale, -lim, lim, rng);
      take(p);
      for (auto& c : cand.dep.components) {
        (b.kind == BlockKind::Delta1 ? c.delta1 : c.delta2) = p.candidate[0];
      }
      break;
    }
    case BlockKind::DfContinuous:
    case BlockKind::DfInteger: {
      const auto p = propose_df(cur.dep.components.front().v,
                                b.kind == BlockKind::DfInteger ? DfMode::Integer : DfMode::Continuous, scale, rng);
      take(p);
      for (auto& c : cand.dep.components) c.v = p.candidate;
      break;
    }
    case BlockKind::MarginMu: {
      auto& bulk = cand.margin(b.margin).bulk;
      const auto p = propose_ordered(bulk.mu, static_cast<std::size_t>(b.index), scale, 0.0, kInf, rng);
      take(p);
      bulk.mu = p.candidate;
      break;
    }
    case BlockKind::MarginEta: {
      double& eta = cand.margin(b.margin).bulk.eta[static_cast<std::size_t>(b.index)];
      const double old = eta;
      eta = old * std::exp(scale * standard_normal(rng));
      out.log_q_forward = -std::log(eta);
      out.log_q_backward = -std::log(old);
      if (!(eta > 0.0) || !std::isfinite(eta)) out.forced_reject = true;
      break;
    }
    case BlockKind::MarginWeights: {
      auto& bulk = cand.margin(b.margin).bulk;
      const auto p = propose_weights(bulk.w, concentration, rng);
      take(p);
      bulk.w = p.candidate;
      break;
    }
    case BlockKind::MarginGpd: {
      GpdParams& t = cand.margin(b.margin).tail;
      const double old_sigma = t.sigma;
      t.xi += scale * standard_normal(rng);
      t.sigma = old_sigma * std::exp(scale * standard_normal(rng));
      out.log_q_forward = -std::log(t.sigma);
      out.log_q_backward = -std::log(old_sigma);
      if (!(t.sigma > 0.0) || !std::isfinite(t.sigma)) out.forced_reject = true;
      break;
    }
    case BlockKind::MarginThreshold: {
      cand.margin(b.margin).tail.u += scale * standard_normal(rng);
      break;
    }
  }
  return out;
}

}  // namespace

Chain run_chain(const Dataset& data, const FitConfig& cfg, std::uint64_t seed) {
  validate(data);
  validate(cfg);
  Chain chain;
  chain.seed = seed;
  chain.schedule = cfg.schedule;
  chain.initial = cfg.init ? *cfg.init : initial_params(data, cfg);
  chain.prior = resolve_prior(data, cfg, chain.initial);
  chain.blocks = active_blocks(chain.initial);
  for (const std::string& name : cfg.fixed_blocks) {
    const auto hit = std::find_if(chain.blocks.begin(), chain.blocks.end(),
                                  [&name](const BlockId& b) { return b.name() == name; });
    if (hit == chain.blocks.end()) throw ConfigError("fixed_blocks: no active block named '" + name + "'");
    chain.blocks.erase(hit);
  }
  const McmcSchedule& sch = cfg.schedule;
  ProposalScales scales = initial_scales(chain.blocks, chain.initial, chain.prior, sch.dirichlet_concentration);

  ModelParams cur = chain.initial;
  LikelihoodCache cache(data);
  double cur_prior = check(cur) ? kNegInf : log_prior(cur, chain.prior);
  double cur_ll = cur_prior == kNegInf ? kNegInf : cache.reset(cur);
  if (cur_prior == kNegInf || cur_ll == kNegInf) {
    throw ParameterError("initial state has zero posterior density: " + describe_violation(cur, chain.prior, data));
  }
  double cur_lp = cur_prior + cur_ll;

  Rng rng(seed);
  const std::size_t nb = chain.blocks.size();
  chain.proposed.assign(nb, 0);
  chain.accepted.assign(nb, 0);
  std::vector<std::size_t> batch_acc(nb, 0);
  std::size_t batch_index = 0;
  chain.draws.reserve(sch.retained());

  for (std::size_t it = 1; it <= sch.iterations; ++it) {
    for (std::size_t bi = 0; bi < nb; ++bi) {
      const BlockId& b = chain.blocks[bi];
      ++chain.proposed[bi];
      auto prop = propose_block(b, cur, std::exp(scales.log_scale[bi]), scales.dirichlet_concentration, rng);
      if (prop.forced_reject) continue;
      const double lprior = log_prior(prop.candidate, chain.prior);
      if (lprior == kNegInf) continue;
      const double ll = cache.evaluate(prop.candidate);
      if (ll == kNegInf) continue;
      const double lp = lprior + ll;
      if (mh_accept(lp, cur_lp, prop.log_q_forward, prop.log_q_backward, rng)) {
        cache.accept();
        cur = std::move(prop.candidate);
        cur_lp = lp;
        cur_ll = ll;
        ++chain.accepted[bi];
        ++batch_acc[bi];
      }
    }

    if (it <= sch.burn_in && it % sch.adapt_batch == 0) {
      ++batch_index;
      const double step = std::min(0.05, 1.0 / std::sqrt(static_cast<double>(batch_index)));
      AdaptationRecord rec{it, {}, {}};
      for (std::size_t bi = 0; bi < nb; ++bi) {
        const double rate = static_cast<double>(batch_acc[bi]) / static_cast<double>(sch.adapt_batch);
        if (chain.blocks[bi].adaptive()) scales.log_scale[bi] += rate > sch.target_accept ? step : -step;
        rec.accept_rate.push_back(rate);
        batch_acc[bi] = 0;
      }
      rec.log_scale = scales.log_scale;
      chain.adaptation.push_back(std::move(rec));
    }
    if (it == sch.burn_in) std::fill(batch_acc.begin(), batch_acc.end(), 0);

    if (it > sch.burn_in && (it - sch.burn_in) % sch.thin == 0) {
      chain.draws.push_back(cur);
      chain.iteration.push_back(it);
      chain.log_post.push_back(cur_lp);
      chain.log_lik.push_back(cur_ll);
    }
  }
  chain.final_log_scale = scales.log_scale;
  return chain;
}

}  // namespace bivex
