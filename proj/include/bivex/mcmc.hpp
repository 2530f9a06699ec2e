#pragma once

// Adaptive block Metropolis-Hastings sampler.

#include <cstdint>
#include <string>
#include <vector>

#include "bivex/config.hpp"
#include "bivex/model.hpp"
#include "bivex/prior.hpp"
#include "bivex/random.hpp"

namespace bivex {

enum class BlockKind {
  Rho,
  Theta,
  CopulaWeights,
  Delta1,
  Delta2,
  DfContinuous,
  DfInteger,
  MarginMu,
  MarginEta,
  MarginWeights,
  MarginGpd,
  MarginThreshold,
};

struct BlockId {
  BlockKind kind;
  int margin = -1;  // 0 or 1 for marginal blocks
  int index = -1;   // component index where applicable

  std::string name() const;
  /// Dirichlet and discrete-uniform blocks have no tunable scale.
  bool adaptive() const;
};

/// Active blocks, in sweep order, for a given parameter layout.
std::vector<BlockId> active_blocks(const ModelParams& theta);

struct ProposalScales {
  std::vector<double> log_scale;  // one per active block
  double dirichlet_concentration = 50.0;
};

/// Starting scales derived from the initial parameters and prior.
ProposalScales initial_scales(const std::vector<BlockId>& blocks, const ModelParams& init,
                              const PriorConfig& prior, double dirichlet_concentration);

template <typename T>
struct Proposal {
  T candidate;
  double log_q_forward = 0.0;   // log q(current -> candidate)
  double log_q_backward = 0.0;  // log q(candidate -> current)
  bool forced_reject = false;
};

/// Accept with probability min(1, exp(dpost + log_q_backward - log_q_forward)).
bool mh_accept(double log_post_prop, double log_post_cur, double log_q_forward, double log_q_backward, Rng& rng);

double truncated_normal_logpdf(double x, double mean, double sd, double lo, double hi);
double truncated_normal_draw(double mean, double sd, double lo, double hi, Rng& rng);
double dirichlet_logpdf(const std::vector<double>& x, const std::vector<double>& alpha);

/// Truncated-normal move of element i, confined between its neighbours and
/// the outer bounds.
Proposal<std::vector<double>> propose_ordered(const std::vector<double>& current, std::size_t i, double scale,
                                              double lower, double upper, Rng& rng);
/// Ordered correlations on (-1, 1).
Proposal<std::vector<double>> propose_rho(const std::vector<double>& current, std::size_t i, double scale, Rng& rng);
/// Dirichlet(V_w * current) with components floored at 1e-6.
Proposal<std::vector<double>> propose_weights(const std::vector<double>& current, double concentration, Rng& rng);

enum class DfMode { Continuous, Integer };
/// Continuous: gamma with mean v and variance scale^2. Integer: uniform on
/// {v-2, ..., v+2}; candidates below 1 are forced rejections.
Proposal<double> propose_df(double current, DfMode mode, double scale, Rng& rng);

double log_posterior(const ModelParams& theta, const Dataset& data, const PriorConfig& prior);

struct AdaptationRecord {
  std::size_t iteration;
  std::vector<double> log_scale;
  std::vector<double> accept_rate;
};

struct Chain {
  std::vector<ModelParams> draws;
  std::vector<std::size_t> iteration;
  std::vector<double> log_post;
  std::vector<double> log_lik;
  std::vector<BlockId> blocks;
  std::vector<std::size_t> proposed;  // per block, whole run
  std::vector<std::size_t> accepted;
  std::vector<double> final_log_scale;
  std::vector<AdaptationRecord> adaptation;
  std::uint64_t seed = 0;
  McmcSchedule schedule;
  PriorConfig prior;
  ModelParams initial;

  std::size_t size() const { return draws.size(); }
};

/// Layout-only initialization: k-means bulk, method-of-moments tail at the
/// empirical 90% quantile, Spearman-based dependence.
ModelParams initial_params(const Dataset& data, const FitConfig& cfg);
/// Data-driven defaults overlaid by any explicit prior settings in cfg.
PriorConfig resolve_prior(const Dataset& data, const FitConfig& cfg, const ModelParams& init);

/// Runs one chain. Throws ParameterError naming the block when the starting
/// point has zero posterior density.
Chain run_chain(const Dataset& data, const FitConfig& cfg, std::uint64_t seed);

}  // namespace bivex
