#pragma once

// Incremental log-likelihood evaluation. Keeps per-observation marginal and
// copula terms for the current parameters and recomputes only what a
// candidate changes: gamma components whose (mu, eta) moved, points whose
// marginal df value moved, and the latent transform when df/skewness moved.

#include <array>
#include <vector>

#include "bivex/model.hpp"

namespace bivex {

class LikelihoodCache {
 public:
  explicit LikelihoodCache(const Dataset& data);

  /// Full recomputation; makes theta the current state.
  double reset(const ModelParams& theta);
  /// Log-likelihood of a candidate, computed relative to the current state.
  /// The result is held as pending until accept() or the next evaluate().
  double evaluate(const ModelParams& candidate);
  /// Promote the last evaluated candidate to the current state.
  void accept();

  double value() const { return cur_.total; }
  const ModelParams& params() const { return cur_.theta; }

 private:
  struct MarginState {
    std::vector<std::vector<double>> comp_cdf;
    std::vector<std::vector<double>> comp_logpdf;
    std::vector<double> cdf;
    std::vector<double> logpdf;
    double hu = 0.0;
  };
  struct State {
    ModelParams theta;
    std::array<MarginState, 2> margins;
    std::array<std::vector<double>, 2> latent;
    std::vector<double> logc;
    double total = kNegInf;
    bool valid = false;
  };

  double compute(const ModelParams& theta, const State* base, State& out);

  std::array<std::vector<double>, 2> x_;
  State cur_;
  State next_;
  bool pending_ = false;
};

}  // namespace bivex
