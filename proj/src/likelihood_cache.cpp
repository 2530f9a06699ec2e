#include "bivex/likelihood_cache.hpp"

#include <cmath>

#include "bivex/error.hpp"

namespace bivex {

namespace {

bool same_copula(const CopulaMixture& a, const CopulaMixture& b) {
  if (a.size() != b.size() || a.w != b.w) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const CopulaParams& x = a.components[i];
    const CopulaParams& y = b.components[i];
    if (x.family != y.family || x.rho != y.rho || x.v != y.v || x.delta1 != y.delta1 || x.delta2 != y.delta2 ||
        x.theta != y.theta) {
      return false;
    }
  }
  return true;
}

bool same_tail(const GpdParams& a, const GpdParams& b) { return a.xi == b.xi && a.sigma == b.sigma && a.u == b.u; }

}  // namespace

LikelihoodCache::LikelihoodCache(const Dataset& data) {
  validate(data);
  x_[0] = data.column(0);
  x_[1] = data.column(1);
}

double LikelihoodCache::reset(const ModelParams& theta) {
  pending_ = false;
  compute(theta, nullptr, cur_);
  return cur_.total;
}

double LikelihoodCache::evaluate(const ModelParams& candidate) {
  if (!cur_.valid) {
    pending_ = false;
    compute(candidate, nullptr, next_);
  } else {
    next_ = cur_;
    compute(candidate, &cur_, next_);
  }
  pending_ = true;
  return next_.total;
}

void LikelihoodCache::accept() {
  if (!pending_) throw std::logic_error("LikelihoodCache::accept without a pending candidate");
  std::swap(cur_, next_);
  pending_ = false;
}

double LikelihoodCache::compute(const ModelParams& theta, const State* base, State& out) {
  out.theta = theta;
  out.valid = false;
  out.total = kNegInf;
  if (check(theta)) return kNegInf;

  const std::size_t n = x_[0].size();
  std::array<std::vector<char>, 2> moved;

  for (int i = 0; i < 2; ++i) {
    const MarginalParams& m = theta.margin(i);
    const std::vector<double>& x = x_[static_cast<std::size_t>(i)];
    MarginState& ms = out.margins[static_cast<std::size_t>(i)];
    const std::size_t nb = m.bulk.size();
    const MarginalParams* old = base ? &base->theta.margin(i) : nullptr;
    const bool same_layout = old && old->bulk.size() == nb;

    ms.comp_cdf.resize(nb);
    ms.comp_logpdf.resize(nb);
    bool bulk_changed = !same_layout || old->bulk.w != m.bulk.w;
    for (std::size_t j = 0; j < nb; ++j) {
      if (same_layout && old->bulk.mu[j] == m.bulk.mu[j] && old->bulk.eta[j] == m.bulk.eta[j]) continue;
      bulk_changed = true;
      ms.comp_cdf[j].resize(n);
      ms.comp_logpdf[j].resize(n);
      for (std::size_t k = 0; k < n; ++k) {
        ms.comp_cdf[j][k] = gamma_cdf(x[k], m.bulk.mu[j], m.bulk.eta[j]);
        ms.comp_logpdf[j][k] = gamma_log_pdf(x[k], m.bulk.mu[j], m.bulk.eta[j]);
      }
    }

    std::vector<char>& mv = moved[static_cast<std::size_t>(i)];
    mv.assign(n, base ? 0 : 1);
    if (base && !bulk_changed && same_tail(old->tail, m.tail)) continue;

    const GpdParams& t = m.tail;
    double hu = 0.0;
    if (t.u > 0.0) {
      for (std::size_t j = 0; j < nb; ++j) hu += m.bulk.w[j] * gamma_cdf(t.u, m.bulk.mu[j], m.bulk.eta[j]);
      hu = std::min(hu, 1.0);
    }
    ms.hu = hu;
    const double log_tail_mass = hu < 1.0 ? std::log1p(-hu) : kNegInf;
    std::vector<double> log_w(nb);
    for (std::size_t j = 0; j < nb; ++j) log_w[j] = m.bulk.w[j] > 0.0 ? std::log(m.bulk.w[j]) : kNegInf;

    ms.cdf.resize(n);
    ms.logpdf.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
      double f = 0.0;
      double lf = 0.0;
      if (x[k] <= t.u) {
        double mx = kNegInf;
        for (std::size_t j = 0; j < nb; ++j) mx = std::max(mx, log_w[j] + ms.comp_logpdf[j][k]);
        double s = 0.0;
        for (std::size_t j = 0; j < nb; ++j) {
          f += m.bulk.w[j] * ms.comp_cdf[j][k];
          s += std::exp(log_w[j] + ms.comp_logpdf[j][k] - mx);
        }
        lf = mx == kNegInf ? kNegInf : mx + std::log(s);
        f = std::min(f, 1.0);
      } else {
        lf = log_tail_mass + gpd_pdf(x[k], t);
        f = std::min(1.0, hu + (1.0 - hu) * gpd_cdf(x[k], t));
      }
      if (lf == kNegInf || std::isnan(lf)) return kNegInf;
      if (!base || f != ms.cdf[k]) mv[k] = 1;
      ms.cdf[k] = f;
      ms.logpdf[k] = lf;
    }
  }

  const CopulaEvaluator eval(theta.dep);
  const bool transform_changed = !base || !eval.same_transform(base->theta.dep);
  const bool mix_changed = !base || !same_copula(base->theta.dep, theta.dep);
  out.latent[0].resize(n);
  out.latent[1].resize(n);
  out.logc.resize(n);
  const MarginState& a = out.margins[0];
  const MarginState& b = out.margins[1];
  for (std::size_t k = 0; k < n; ++k) {
    const bool m0 = transform_changed || moved[0][k];
    const bool m1 = transform_changed || moved[1][k];
    if (m0) out.latent[0][k] = eval.latent(0, a.cdf[k]);
    if (m1) out.latent[1][k] = eval.latent(1, b.cdf[k]);
    if (mix_changed || m0 || m1) {
      out.logc[k] = eval.log_density(out.latent[0][k], out.latent[1][k], a.cdf[k], b.cdf[k]);
    }
    if (out.logc[k] == kNegInf || std::isnan(out.logc[k])) return kNegInf;
  }

  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) total += out.logc[k] + a.logpdf[k] + b.logpdf[k];
  if (std::isnan(total)) return kNegInf;
  out.total = total;
  out.valid = true;
  return total;
}

}  // namespace bivex
