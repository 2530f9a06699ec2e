#pragma once

// Log-prior for every parameter block. Constraint violations return -inf.

#include <array>
#include <vector>

#include "bivex/model.hpp"

namespace bivex {

/// Hyperparameters for one margin. Gamma prior on each eta_j with shape c_j
/// and mean d_j; inverse-gamma prior on each mu_j with shape a_j and mean b_j;
/// normal prior on the threshold.
struct MarginPrior {
  std::vector<double> eta_shape;  // c
  std::vector<double> eta_mean;   // d
  std::vector<double> mu_shape;   // a (> 1 so the mean exists)
  std::vector<double> mu_mean;    // b
  double u_mean = 0.0;
  double u_sd = 1.0;
};

struct PriorConfig {
  std::array<MarginPrior, 2> margins;
  /// Mean of the zero-truncated Poisson prior on an integer df.
  double df_poisson_mean = 25.0;
  /// Cutoff for the phi criterion (used by analysis).
  double phi_c = 10.0;
};

std::optional<std::string> check(const PriorConfig& cfg, const ModelParams& shape);

/// Data-driven defaults: threshold mean at the 90% empirical quantile, sd
/// (q90 - q50)/4; gamma/inverse-gamma priors centred on the supplied
/// initial values with large variance.
MarginPrior default_margin_prior(const std::vector<double>& x, const GammaMixParams& init);

double gpd_logprior(double xi, double sigma);
double t_df_logprior(double v);
double threshold_logprior(double u, double mean, double sd);
/// lambda with lambda / (1 - exp(-lambda)) = mean; requires mean > 1.
double ztpoisson_rate(double mean);
double ztpoisson_logpmf(double v, double mean);

double margin_logprior(const MarginalParams& m, const MarginPrior& p);
double copula_logprior(const CopulaMixture& mix, const PriorConfig& cfg);
double log_prior(const ModelParams& theta, const PriorConfig& cfg);

}  // namespace bivex
