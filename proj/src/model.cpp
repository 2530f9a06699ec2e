#include "bivex/model.hpp"

#include <cmath>

#include "bivex/error.hpp"
#include "bivex/likelihood_cache.hpp"

namespace bivex {

std::optional<std::string> check(const ModelParams& theta) {
  if (auto e = check(theta.m1)) return "margin 1: " + *e;
  if (auto e = check(theta.m2)) return "margin 2: " + *e;
  if (auto e = check(theta.dep)) return "copula: " + *e;
  return std::nullopt;
}

void validate(const ModelParams& theta) {
  if (auto e = check(theta)) throw ParameterError(*e);
}

std::vector<double> Dataset::column(int i) const {
  std::vector<double> out(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) out[k] = pairs[k][static_cast<std::size_t>(i)];
  return out;
}

void validate(const Dataset& data) {
  if (data.pairs.empty()) throw DataError("dataset is empty");
  for (std::size_t k = 0; k < data.pairs.size(); ++k) {
    for (std::size_t c = 0; c < 2; ++c) {
      const double x = data.pairs[k][c];
      if (!std::isfinite(x) || !(x > 0.0)) {
        throw DataError("row " + std::to_string(k + 1) + ", column " + std::to_string(c + 1) +
                            ": values must be finite and positive",
                        k + 1, c + 1);
      }
    }
  }
}

double log_likelihood(const ModelParams& theta, const Dataset& data) {
  LikelihoodCache cache(data);
  return cache.reset(theta);
}

namespace {

double margin_cdf(double x, const MarginalParams& m) { return x > 0.0 ? mgpd_cdf(x, m) : 0.0; }

}  // namespace

Probability joint_exceedance(const ModelParams& theta, double x1, double x2) {
  validate(theta);
  return mixture_survival(theta.dep, margin_cdf(x1, theta.m1), margin_cdf(x2, theta.m2));
}

// Both functionals depend on the copula only: F_i(F_i^{-1}(u)) = u.
Probability chi_u(const ModelParams& theta, Probability u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("chi_u: u must lie in (0,1)");
  if (u > 1.0 - 1e-10) throw DomainError("chi_u: u too close to 1 for df accuracy");
  validate(theta);
  return std::min(1.0, mixture_survival(theta.dep, u, u) / (1.0 - u));
}

double chibar_u(const ModelParams& theta, Probability u) {
  if (!(u > 0.0 && u < 1.0)) throw DomainError("chibar_u: u must lie in (0,1)");
  if (u > 1.0 - 1e-10) throw DomainError("chibar_u: u too close to 1 for df accuracy");
  validate(theta);
  const double joint = mixture_survival(theta.dep, u, u);
  if (!(joint > 0.0)) throw DomainError("chibar_u: zero joint exceedance probability");
  if (joint >= 1.0 - u) return 1.0;
  return 2.0 * std::log1p(-u) / std::log(joint) - 1.0;
}

Dataset model_sample(const ModelParams& theta, std::size_t n, Rng& rng) {
  validate(theta);
  const auto uv = copula_sample(theta.dep, n, rng);
  Dataset out;
  out.pairs.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    out.pairs[k] = {mgpd_quantile(uv[k][0], theta.m1), mgpd_quantile(uv[k][1], theta.m2)};
  }
  return out;
}

namespace {

void margin_names(std::vector<std::string>& out, const MarginalParams& m, const std::string& pre) {
  const std::size_t n = m.bulk.size();
  for (const char* key : {"w", "mu", "eta"}) {
    for (std::size_t j = 0; j < n; ++j) out.push_back(pre + key + std::to_string(j + 1));
  }
  out.push_back(pre + "xi");
  out.push_back(pre + "sigma");
  out.push_back(pre + "u");
}

}  // namespace

std::vector<std::string> parameter_names(const ModelParams& layout) {
  std::vector<std::string> out;
  margin_names(out, layout.m1, "m1_");
  margin_names(out, layout.m2, "m2_");
  const std::size_t n = layout.dep.size();
  const CopulaFamily fam = layout.dep.family();
  for (std::size_t i = 0; i < n; ++i) out.push_back("cop_w" + std::to_string(i + 1));
  const std::string key = is_elliptical(fam) ? "cop_rho" : "cop_theta";
  for (std::size_t i = 0; i < n; ++i) out.push_back(key + std::to_string(i + 1));
  if (has_df(fam)) out.push_back("cop_v");
  if (has_skew(fam)) {
    out.push_back("cop_delta1");
    out.push_back("cop_delta2");
  }
  return out;
}

std::vector<double> flatten(const ModelParams& theta) {
  std::vector<double> out;
  for (int i = 0; i < 2; ++i) {
    const MarginalParams& m = theta.margin(i);
    out.insert(out.end(), m.bulk.w.begin(), m.bulk.w.end());
    out.insert(out.end(), m.bulk.mu.begin(), m.bulk.mu.end());
    out.insert(out.end(), m.bulk.eta.begin(), m.bulk.eta.end());
    out.push_back(m.tail.xi);
    out.push_back(m.tail.sigma);
    out.push_back(m.tail.u);
  }
  const CopulaFamily fam = theta.dep.family();
  out.insert(out.end(), theta.dep.w.begin(), theta.dep.w.end());
  for (const auto& c : theta.dep.components) out.push_back(c.order_key());
  if (has_df(fam)) out.push_back(theta.dep.components.front().v);
  if (has_skew(fam)) {
    out.push_back(theta.dep.components.front().delta1);
    out.push_back(theta.dep.components.front().delta2);
  }
  return out;
}

ModelParams unflatten(const ModelParams& layout, const std::vector<double>& values) {
  ModelParams theta = layout;
  std::size_t k = 0;
  auto next = [&]() {
    if (k >= values.size()) throw ParameterError("unflatten: too few values for the layout");
    return values[k++];
  };
  for (int i = 0; i < 2; ++i) {
    MarginalParams& m = theta.margin(i);
    for (double& x : m.bulk.w) x = next();
    for (double& x : m.bulk.mu) x = next();
    for (double& x : m.bulk.eta) x = next();
    m.tail.xi = next();
    m.tail.sigma = next();
    m.tail.u = next();
  }
  const CopulaFamily fam = theta.dep.family();
  for (double& x : theta.dep.w) x = next();
  for (auto& c : theta.dep.components) {
    const double key = next();
    if (is_elliptical(fam)) {
      c.rho = key;
    } else {
      c.theta = key;
    }
  }
  if (has_df(fam)) {
    const double v = next();
    for (auto& c : theta.dep.components) c.v = v;
  }
  if (has_skew(fam)) {
    const double d1 = next();
    const double d2 = next();
    for (auto& c : theta.dep.components) {
      c.delta1 = d1;
      c.delta2 = d2;
    }
  }
  if (k != values.size()) throw ParameterError("unflatten: too many values for the layout");
  return theta;
}

ModelParams make_layout(CopulaFamily family, std::size_t copula_components, std::size_t n1, std::size_t n2) {
  if (copula_components == 0 || n1 == 0 || n2 == 0) throw ParameterError("mixture sizes must be at least 1");
  ModelParams theta;
  const std::array<std::size_t, 2> sizes{n1, n2};
  for (int i = 0; i < 2; ++i) {
    const std::size_t n = sizes[static_cast<std::size_t>(i)];
    GammaMixParams& b = theta.margin(i).bulk;
    b.w.assign(n, 1.0 / static_cast<double>(n));
    b.eta.assign(n, 1.0);
    b.mu.resize(n);
    for (std::size_t j = 0; j < n; ++j) b.mu[j] = static_cast<double>(j + 1);
  }
  theta.dep.w.assign(copula_components, 1.0 / static_cast<double>(copula_components));
  theta.dep.components.resize(copula_components);
  for (auto& c : theta.dep.components) c.family = family;
  return theta;
}

}  // namespace bivex
