#include "bivex/analysis.hpp"

#include <algorithm>
#include <cmath>

#include "bivex/error.hpp"

namespace bivex {

namespace {

// Shifted mean: exact when every value is identical.
double stable_mean(std::span<const double> x) {
  if (x.empty()) return 0.0;
  const double x0 = x[0];
  double s = 0.0;
  for (double v : x) s += v - x0;
  return x0 + s / static_cast<double>(x.size());
}

void require_draws(const Chain& chain) {
  if (chain.draws.empty()) throw ParameterError("chain has no retained draws");
}

}  // namespace

double empirical_quantile(std::span<const double> values, double p) {
  if (values.empty()) throw DomainError("empirical_quantile: empty input");
  std::vector<double> s(values.begin(), values.end());
  std::sort(s.begin(), s.end());
  const double h = (static_cast<double>(s.size()) - 1.0) * p;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, s.size() - 1);
  return s[lo] + (h - static_cast<double>(lo)) * (s[hi] - s[lo]);
}

double effective_sample_size(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 4) return static_cast<double>(n);
  const double mean = stable_mean(values);
  auto acov = [&](std::size_t lag) {
    double s = 0.0;
    for (std::size_t t = 0; t + lag < n; ++t) s += (values[t] - mean) * (values[t + lag] - mean);
    return s / static_cast<double>(n);
  };
  const double g0 = acov(0);
  if (!(g0 > 0.0)) return static_cast<double>(n);
  double tau = -g0;
  double prev = std::numeric_limits<double>::infinity();
  for (std::size_t m = 0; 2 * m + 1 < n; ++m) {
    double pair = acov(2 * m) + acov(2 * m + 1);
    if (pair <= 0.0) break;
    pair = std::min(pair, prev);  // initial monotone sequence
    prev = pair;
    tau += 2.0 * pair;
  }
  const double ess = static_cast<double>(n) * g0 / tau;
  return std::min(ess, static_cast<double>(n));
}

PosteriorSummary summarize(std::span<const double> values) {
  if (values.empty()) throw DomainError("summarize: empty input");
  PosteriorSummary s;
  s.n = values.size();
  s.mean = stable_mean(values);
  double ss = 0.0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.sd = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  s.lo = empirical_quantile(values, 0.025);
  s.hi = empirical_quantile(values, 0.975);
  s.ess = effective_sample_size(values);
  return s;
}

std::vector<double> functional_values(const Chain& chain, const std::function<double(const ModelParams&)>& f) {
  require_draws(chain);
  std::vector<double> out(chain.size());
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out[i] = f(chain.draws[i]);
    if (!std::isfinite(out[i])) {
      throw AccuracyError("functional is not finite at draw " + std::to_string(i));
    }
  }
  return out;
}

PosteriorSummary functional_posterior(const Chain& chain, const std::function<double(const ModelParams&)>& f) {
  const auto v = functional_values(chain, f);
  return summarize(v);
}

std::vector<std::pair<std::string, PosteriorSummary>> parameter_summaries(const Chain& chain) {
  require_draws(chain);
  const auto names = parameter_names(chain.draws.front());
  std::vector<std::vector<double>> cols(names.size(), std::vector<double>(chain.size()));
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto flat = flatten(chain.draws[i]);
    for (std::size_t c = 0; c < names.size(); ++c) cols[c][i] = flat[c];
  }
  std::vector<std::pair<std::string, PosteriorSummary>> out;
  for (std::size_t c = 0; c < names.size(); ++c) out.emplace_back(names[c], summarize(cols[c]));
  return out;
}

Probability phi_criterion(const Chain& chain, double c) {
  require_draws(chain);
  if (!has_df(chain.draws.front().dep.family())) {
    throw ParameterError("phi criterion needs a copula family with degrees of freedom");
  }
  std::size_t count = 0;
  for (const auto& d : chain.draws) {
    if (d.dep.components.front().v > c) ++count;
  }
  return static_cast<double>(count) / static_cast<double>(chain.size());
}

PosteriorSummary quantile_posterior(const Chain& chain, int margin, Probability p) {
  if (margin != 1 && margin != 2) throw DomainError("quantile_posterior: margin must be 1 or 2");
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile_posterior: p must lie in (0,1)");
  return functional_posterior(chain, [&](const ModelParams& t) { return mgpd_quantile(p, t.margin(margin - 1)); });
}

std::vector<Probability> predictive_exceedance(const Chain& chain, const std::vector<std::array<double, 2>>& grid) {
  require_draws(chain);
  if (grid.empty()) throw DomainError("predictive_exceedance: empty grid");
  std::vector<Probability> out(grid.size(), 0.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    const auto v = functional_values(chain, [&](const ModelParams& t) {
      return joint_exceedance(t, grid[g][0], grid[g][1]);
    });
    out[g] = std::clamp(stable_mean(v), 0.0, 1.0);
  }
  return out;
}

std::pair<CurveEstimate, CurveEstimate> dependence_curves(const Chain& chain, const std::vector<double>& u_grid) {
  require_draws(chain);
  CurveEstimate chi, chibar;
  for (double u : u_grid) {
    if (!(u > 0.0 && u < 1.0)) throw DomainError("dependence_curves: grid values must lie in (0,1)");
    const auto a = summarize(functional_values(chain, [u](const ModelParams& t) { return chi_u(t, u); }));
    const auto b = summarize(functional_values(chain, [u](const ModelParams& t) { return chibar_u(t, u); }));
    chi.u.push_back(u);
    chi.mean.push_back(a.mean);
    chi.lo.push_back(std::min(a.lo, a.mean));
    chi.hi.push_back(std::max(a.hi, a.mean));
    chibar.u.push_back(u);
    chibar.mean.push_back(b.mean);
    chibar.lo.push_back(std::min(b.lo, b.mean));
    chibar.hi.push_back(std::max(b.hi, b.mean));
  }
  return {chi, chibar};
}

ModelParams posterior_mean_params(const Chain& chain) {
  require_draws(chain);
  const ModelParams& layout = chain.draws.front();
  const std::size_t k = flatten(layout).size();
  std::vector<std::vector<double>> cols(k, std::vector<double>(chain.size()));
  for (std::size_t i = 0; i < chain.size(); ++i) {
    const auto flat = flatten(chain.draws[i]);
    for (std::size_t c = 0; c < k; ++c) cols[c][i] = flat[c];
  }
  std::vector<double> mean(k);
  for (std::size_t c = 0; c < k; ++c) mean[c] = stable_mean(cols[c]);
  ModelParams theta = unflatten(layout, mean);
  if (theta.dep.family() == CopulaFamily::SkewT) {
    for (auto& c : theta.dep.components) c.v = std::max(1.0, std::round(c.v));
  }
  return theta;
}

std::size_t free_parameter_count(const ModelParams& layout) {
  std::size_t k = 0;
  for (int i = 0; i < 2; ++i) k += 3 * layout.margin(i).bulk.size() + 2;
  const std::size_t n = layout.dep.size();
  k += (n - 1) + n;
  const CopulaFamily fam = layout.dep.family();
  if (has_df(fam)) k += 1;
  if (has_skew(fam)) k += 2;
  return k;
}

InformationCriteria information_criteria(const Chain& chain, const Dataset& data) {
  require_draws(chain);
  validate(data);
  InformationCriteria ic;
  std::vector<double> ll = chain.log_lik;
  if (ll.size() != chain.size()) {
    ll.resize(chain.size());
    for (std::size_t i = 0; i < chain.size(); ++i) ll[i] = log_likelihood(chain.draws[i], data);
  }
  std::vector<double> dev(ll.size());
  for (std::size_t i = 0; i < ll.size(); ++i) dev[i] = -2.0 * ll[i];
  ic.max_log_lik = *std::max_element(ll.begin(), ll.end());
  ic.k = free_parameter_count(chain.draws.front());
  ic.m = data.size();
  ic.bic = -2.0 * ic.max_log_lik + static_cast<double>(ic.k) * std::log(static_cast<double>(ic.m));
  ic.mean_deviance = stable_mean(dev);
  const ModelParams mean = posterior_mean_params(chain);
  if (auto e = check(mean)) throw ParameterError("posterior mean parameters violate a constraint: " + *e);
  const double ll_mean = log_likelihood(mean, data);
  if (!std::isfinite(ll_mean)) throw ParameterError("posterior mean parameters have zero likelihood");
  ic.deviance_at_mean = -2.0 * ll_mean;
  ic.p_d = ic.mean_deviance - ic.deviance_at_mean;
  ic.dic = ic.mean_deviance + ic.p_d;
  return ic;
}

std::vector<double> mean_copula_weights(const Chain& chain) {
  require_draws(chain);
  const std::size_t n = chain.draws.front().dep.size();
  std::vector<double> out(n);
  for (std::size_t j = 0; j < n; ++j) {
    std::vector<double> col(chain.size());
    for (std::size_t i = 0; i < chain.size(); ++i) col[i] = chain.draws[i].dep.w[j];
    out[j] = stable_mean(col);
  }
  return out;
}

std::size_t nonzero_weight_count(const Chain& chain, double threshold) {
  const auto w = mean_copula_weights(chain);
  return static_cast<std::size_t>(std::count_if(w.begin(), w.end(), [&](double x) { return x > threshold; }));
}

}  // namespace bivex
