#pragma once

// Bivariate copulae (Gaussian, Student-t, skew-normal, skew-t, Gumbel, FGM)
// and finite mixtures of copulae drawn from a single family.

#include <array>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "bivex/random.hpp"
#include "bivex/special_fn.hpp"

namespace bivex {

enum class CopulaFamily { Gaussian, T, SkewNormal, SkewT, Gumbel, FGM };

std::string_view to_string(CopulaFamily f);
CopulaFamily copula_family_from_string(std::string_view name);

bool is_elliptical(CopulaFamily f);
bool has_df(CopulaFamily f);
bool has_skew(CopulaFamily f);

/// Skew parameters are confined to (-1 + eps, 1 - eps).
inline constexpr double kSkewEpsilon = 0.01;
/// Copula arguments are clamped to [kUnitClamp, 1 - kUnitClamp] before
/// quantile transforms.
inline constexpr double kUnitClamp = 1e-12;

struct CopulaParams {
  CopulaFamily family = CopulaFamily::Gaussian;
  double rho = 0.0;
  double v = 10.0;
  double delta1 = 0.0;
  double delta2 = 0.0;
  double theta = 1.0;

  /// The parameter that orders mixture components: theta for Gumbel/FGM,
  /// rho otherwise.
  double order_key() const;
};

/// Reparametrization of the skew families from (rho, delta1, delta2).
struct SkewDerived {
  double lambda1;
  double lambda2;
  double psi;
  double alpha1;
  double alpha2;
};

SkewDerived skew_derived(double rho, double delta1, double delta2);

std::optional<std::string> check(const CopulaParams& cp);
void validate(const CopulaParams& cp);

LogDensity copula_logdensity(const CopulaParams& cp, Probability v1, Probability v2);
Probability copula_cdf(const CopulaParams& cp, Probability v1, Probability v2);
/// P(U1 > v1, U2 > v2). Radially symmetric families are evaluated directly in
/// the upper tail to avoid cancellation in 1 - v1 - v2 + C(v1, v2).
Probability copula_survival(const CopulaParams& cp, Probability v1, Probability v2);

struct CopulaMixture {
  std::vector<double> w;
  std::vector<CopulaParams> components;

  std::size_t size() const { return w.size(); }
  CopulaFamily family() const { return components.front().family; }
};

/// Single-family, shared df/skewness, one skew-t component, ordered keys.
std::optional<std::string> check(const CopulaMixture& mix);
void validate(const CopulaMixture& mix);

LogDensity mixture_logdensity(const CopulaMixture& mix, Probability v1, Probability v2);
Probability mixture_cdf(const CopulaMixture& mix, Probability v1, Probability v2);
Probability mixture_survival(const CopulaMixture& mix, Probability v1, Probability v2);

std::vector<std::array<double, 2>> copula_sample(const CopulaMixture& mix, std::size_t n, Rng& rng);

/// Batch evaluation for likelihood loops. The latent quantile transform of
/// each margin depends only on the family-wide parameters shared by all
/// components (df and skewness), so it is computed once per point.
class CopulaEvaluator {
 public:
  explicit CopulaEvaluator(const CopulaMixture& mix);

  /// Latent coordinate for margin `which` (0 or 1) at probability u.
  double latent(int which, Probability u) const;
  /// True when `other` shares this evaluator's latent transform.
  bool same_transform(const CopulaMixture& other) const;
  /// log sum_i w_i c_i given latent coordinates (and the clamped uniforms).
  LogDensity log_density(double z1, double z2, Probability u1, Probability u2) const;

 private:
  struct Component {
    double log_w;
    double rho;
    double theta;
    double log_norm;  // family-specific constant
    double one_m_r2;
    SkewDerived skew;
  };
  CopulaFamily family_;
  double v_;
  double delta1_;
  double delta2_;
  double lambda1_;
  double lambda2_;
  std::vector<Component> comps_;
};

}  // namespace bivex
