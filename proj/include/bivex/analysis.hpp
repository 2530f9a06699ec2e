#pragma once

// Posterior summaries and extreme-value functionals over retained draws.

#include <array>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bivex/mcmc.hpp"

namespace bivex {

struct PosteriorSummary {
  double mean = 0.0;
  double sd = 0.0;
  double lo = 0.0;  // 2.5% empirical quantile
  double hi = 0.0;  // 97.5% empirical quantile
  double ess = 0.0;
  std::size_t n = 0;
};

/// Type-7 empirical quantile.
double empirical_quantile(std::span<const double> values, double p);
/// Geyer initial positive sequence estimate, capped at the series length.
double effective_sample_size(std::span<const double> values);
PosteriorSummary summarize(std::span<const double> values);

/// Applies f to every draw. A non-finite value raises AccuracyError naming
/// the draw index.
std::vector<double> functional_values(const Chain& chain, const std::function<double(const ModelParams&)>& f);
PosteriorSummary functional_posterior(const Chain& chain, const std::function<double(const ModelParams&)>& f);

/// Summary of every scalar parameter column, in flatten() order.
std::vector<std::pair<std::string, PosteriorSummary>> parameter_summaries(const Chain& chain);

/// Fraction of draws with v > c. ParameterError for families without v.
Probability phi_criterion(const Chain& chain, double c = 10.0);

/// margin is 1 or 2.
PosteriorSummary quantile_posterior(const Chain& chain, int margin, Probability p);

/// Per grid point, the mean joint exceedance probability over draws.
std::vector<Probability> predictive_exceedance(const Chain& chain, const std::vector<std::array<double, 2>>& grid);

struct CurveEstimate {
  std::vector<double> u;
  std::vector<double> mean;
  std::vector<double> lo;
  std::vector<double> hi;
};

/// chi and chibar curves.
std::pair<CurveEstimate, CurveEstimate> dependence_curves(const Chain& chain, const std::vector<double>& u_grid);

/// Component-wise posterior means; an integer df is rounded.
ModelParams posterior_mean_params(const Chain& chain);

/// Free parameters: per margin 3n+2, copula (n-1) weights, n dependence
/// parameters, plus df and skewness where present.
std::size_t free_parameter_count(const ModelParams& layout);

struct InformationCriteria {
  double bic = 0.0;
  double dic = 0.0;
  double p_d = 0.0;
  double mean_deviance = 0.0;
  double deviance_at_mean = 0.0;
  double max_log_lik = 0.0;
  std::size_t k = 0;
  std::size_t m = 0;
};

InformationCriteria information_criteria(const Chain& chain, const Dataset& data);

/// Posterior mean of each copula weight and how many exceed the threshold.
std::vector<double> mean_copula_weights(const Chain& chain);
std::size_t nonzero_weight_count(const Chain& chain, double threshold = 0.05);

}  // namespace bivex
