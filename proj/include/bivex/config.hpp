#pragma once

// Fit configuration and its JSON form.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bivex/copula.hpp"
#include "bivex/model.hpp"
#include "bivex/prior.hpp"

namespace bivex {

struct McmcSchedule {
  std::size_t iterations = 25000;
  std::size_t burn_in = 5000;
  std::size_t thin = 20;
  std::size_t adapt_batch = 50;
  double target_accept = 0.44;
  double dirichlet_concentration = 50.0;

  /// Number of retained draws: floor((iterations - burn_in) / thin).
  std::size_t retained() const { return (iterations - burn_in) / thin; }
};

/// Partial override of a margin's prior; unset fields take data-driven defaults.
struct MarginPriorSpec {
  std::optional<std::vector<double>> eta_shape;
  std::optional<std::vector<double>> eta_mean;
  std::optional<std::vector<double>> mu_shape;
  std::optional<std::vector<double>> mu_mean;
  std::optional<double> u_mean;
  std::optional<double> u_sd;
};

struct FitConfig {
  CopulaFamily family = CopulaFamily::Gaussian;
  std::size_t copula_components = 1;
  std::array<std::size_t, 2> gamma_components{2, 2};
  std::array<MarginPriorSpec, 2> prior;
  double df_poisson_mean = 25.0;
  double phi_c = 10.0;
  McmcSchedule schedule;
  std::uint64_t seed = 1;
  std::size_t chains = 1;
  std::string data_path;
  std::string out_prefix = "chain";
  /// Fraction of rows held out at random (seeded), or an explicit 0-based list.
  double holdout_fraction = 0.0;
  std::vector<std::size_t> holdout_indices;
  /// Optional starting point; overrides the automatic initialization.
  std::optional<ModelParams> init;
  /// Names of sampler blocks held at their initial values (see BlockId::name).
  std::vector<std::string> fixed_blocks;
};

/// Throws ConfigError on an invalid combination.
void validate(const FitConfig& cfg);

nlohmann::json to_json(const MarginalParams& m);
nlohmann::json to_json(const CopulaMixture& mix);
nlohmann::json to_json(const ModelParams& theta);
nlohmann::json to_json(const PriorConfig& prior);
nlohmann::json to_json(const McmcSchedule& s);
nlohmann::json to_json(const FitConfig& cfg);

MarginalParams marginal_from_json(const nlohmann::json& j);
CopulaMixture copula_from_json(const nlohmann::json& j);
ModelParams model_from_json(const nlohmann::json& j);
PriorConfig prior_from_json(const nlohmann::json& j);
McmcSchedule schedule_from_json(const nlohmann::json& j, McmcSchedule base = {});
/// Unknown keys and wrong types raise ConfigError.
FitConfig fit_config_from_json(const nlohmann::json& j);

}  // namespace bivex
