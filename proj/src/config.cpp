#include "bivex/config.hpp"

#include <set>

#include "bivex/error.hpp"

namespace bivex {

using nlohmann::json;

namespace {

void require_object(const json& j, const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + ": expected a JSON object");
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) throw ConfigError(where + ": unknown key '" + it.key() + "'");
  }
}

double get_number(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_number()) throw ConfigError(where + "." + key + ": expected a number");
  return v.get<double>();
}

std::size_t get_count(const json& j, const std::string& key, const std::string& where) {
  const json& v = j.at(key);
  if (!v.is_number_integer() || v.get<long long>() < 0) {
    throw ConfigError(where + "." + key + ": expected a nonnegative integer");
  }
  return v.get<std::size_t>();
}

std::vector<double> get_vector(const json& j, const std::string& key, const std::string& where) {
  if (!j.contains(key)) throw ConfigError(where + ": missing key '" + key + "'");
  const json& v = j.at(key);
  if (!v.is_array()) throw ConfigError(where + "." + key + ": expected an array of numbers");
  std::vector<double> out;
  for (const auto& x : v) {
    if (!x.is_number()) throw ConfigError(where + "." + key + ": expected an array of numbers");
    out.push_back(x.get<double>());
  }
  return out;
}

CopulaFamily get_family(const json& j, const std::string& where) {
  if (!j.is_string()) throw ConfigError(where + ": family must be a string");
  try {
    return copula_family_from_string(j.get<std::string>());
  } catch (const ParameterError& e) {
    throw ConfigError(where + ": " + e.what());
  }
}

}  // namespace

void validate(const FitConfig& cfg) {
  const McmcSchedule& s = cfg.schedule;
  if (!(s.iterations > s.burn_in)) throw ConfigError("mcmc.iterations must exceed mcmc.burn_in");
  if (s.thin < 1) throw ConfigError("mcmc.thin must be at least 1");
  if (s.adapt_batch < 1) throw ConfigError("mcmc.adapt_batch must be at least 1");
  if (!(s.target_accept > 0.0 && s.target_accept < 1.0)) throw ConfigError("mcmc.target_accept must lie in (0,1)");
  if (!(s.dirichlet_concentration > 0.0)) throw ConfigError("mcmc.dirichlet_concentration must be positive");
  if (cfg.copula_components < 1) throw ConfigError("copula_components must be at least 1");
  if (cfg.gamma_components[0] < 1 || cfg.gamma_components[1] < 1) {
    throw ConfigError("gamma_components must be at least 1");
  }
  if (cfg.family == CopulaFamily::SkewT && cfg.copula_components != 1) {
    throw ConfigError("the skew_t family supports a single copula component");
  }
  if (cfg.chains < 1) throw ConfigError("chains must be at least 1");
  if (!(cfg.holdout_fraction >= 0.0 && cfg.holdout_fraction < 1.0)) {
    throw ConfigError("holdout_fraction must lie in [0,1)");
  }
  if (!(cfg.df_poisson_mean > 1.0)) throw ConfigError("prior.df_poisson_mean must exceed 1");
  if (!(cfg.phi_c >= 0.0)) throw ConfigError("prior.phi_c must be nonnegative");
  if (cfg.init) {
    if (auto e = check(*cfg.init)) throw ConfigError("init: " + *e);
    if (cfg.init->dep.family() != cfg.family || cfg.init->dep.size() != cfg.copula_components ||
        cfg.init->m1.bulk.size() != cfg.gamma_components[0] || cfg.init->m2.bulk.size() != cfg.gamma_components[1]) {
      throw ConfigError("init: layout does not match family and mixture sizes");
    }
  }
}

json to_json(const MarginalParams& m) {
  return json{{"w", m.bulk.w},   {"mu", m.bulk.mu},       {"eta", m.bulk.eta},
              {"xi", m.tail.xi}, {"sigma", m.tail.sigma}, {"u", m.tail.u}};
}

json to_json(const CopulaMixture& mix) {
  json comps = json::array();
  const CopulaFamily fam = mix.family();
  for (const auto& c : mix.components) {
    json o = json::object();
    if (is_elliptical(fam)) {
      o["rho"] = c.rho;
    } else {
      o["theta"] = c.theta;
    }
    comps.push_back(o);
  }
  json j{{"family", std::string(to_string(fam))}, {"w", mix.w}, {"components", comps}};
  if (has_df(fam)) j["v"] = mix.components.front().v;
  if (has_skew(fam)) {
    j["delta1"] = mix.components.front().delta1;
    j["delta2"] = mix.components.front().delta2;
  }
  return j;
}

json to_json(const ModelParams& theta) {
  return json{{"margins", json::array({to_json(theta.m1), to_json(theta.m2)})}, {"copula", to_json(theta.dep)}};
}

json to_json(const PriorConfig& prior) {
  json margins = json::array();
  for (const auto& m : prior.margins) {
    margins.push_back(json{{"eta_shape", m.eta_shape},
                           {"eta_mean", m.eta_mean},
                           {"mu_shape", m.mu_shape},
                           {"mu_mean", m.mu_mean},
                           {"u_mean", m.u_mean},
                           {"u_sd", m.u_sd}});
  }
  return json{{"margins", margins}, {"df_poisson_mean", prior.df_poisson_mean}, {"phi_c", prior.phi_c}};
}

json to_json(const McmcSchedule& s) {
  return json{{"iterations", s.iterations},   {"burn_in", s.burn_in},
              {"thin", s.thin},               {"adapt_batch", s.adapt_batch},
              {"target_accept", s.target_accept}, {"dirichlet_concentration", s.dirichlet_concentration}};
}

json to_json(const FitConfig& cfg) {
  json margins = json::array();
  for (const auto& p : cfg.prior) {
    json m = json::object();
    if (p.eta_shape) m["eta_shape"] = *p.eta_shape;
    if (p.eta_mean) m["eta_mean"] = *p.eta_mean;
    if (p.mu_shape) m["mu_shape"] = *p.mu_shape;
    if (p.mu_mean) m["mu_mean"] = *p.mu_mean;
    if (p.u_mean) m["u_mean"] = *p.u_mean;
    if (p.u_sd) m["u_sd"] = *p.u_sd;
    margins.push_back(m);
  }
  json j{{"family", std::string(to_string(cfg.family))},
         {"copula_components", cfg.copula_components},
         {"gamma_components", cfg.gamma_components},
         {"prior", json{{"margins", margins}, {"df_poisson_mean", cfg.df_poisson_mean}, {"phi_c", cfg.phi_c}}},
         {"mcmc", to_json(cfg.schedule)},
         {"seed", cfg.seed},
         {"chains", cfg.chains},
         {"data", cfg.data_path},
         {"out", cfg.out_prefix},
         {"holdout_fraction", cfg.holdout_fraction},
         {"holdout_indices", cfg.holdout_indices}};
  if (cfg.init) j["init"] = to_json(*cfg.init);
  if (!cfg.fixed_blocks.empty()) j["fixed_blocks"] = cfg.fixed_blocks;
  return j;
}

MarginalParams marginal_from_json(const json& j) {
  const std::string where = "margin";
  require_object(j, where);
  reject_unknown(j, {"w", "mu", "eta", "xi", "sigma", "u"}, where);
  MarginalParams m;
  m.bulk.w = get_vector(j, "w", where);
  m.bulk.mu = get_vector(j, "mu", where);
  m.bulk.eta = get_vector(j, "eta", where);
  m.tail.xi = get_number(j, "xi", where);
  m.tail.sigma = get_number(j, "sigma", where);
  m.tail.u = get_number(j, "u", where);
  if (auto e = check(m)) throw ConfigError(where + ": " + *e);
  return m;
}

CopulaMixture copula_from_json(const json& j) {
  const std::string where = "copula";
  require_object(j, where);
  reject_unknown(j, {"family", "w", "components", "v", "delta1", "delta2"}, where);
  if (!j.contains("family")) throw ConfigError(where + ": missing key 'family'");
  const CopulaFamily fam = get_family(j.at("family"), where + ".family");
  if (!j.contains("components") || !j.at("components").is_array() || j.at("components").empty()) {
    throw ConfigError(where + ".components: expected a nonempty array");
  }
  CopulaMixture mix;
  const json& comps = j.at("components");
  mix.w = j.contains("w") ? get_vector(j, "w", where) : std::vector<double>(comps.size(), 1.0 / static_cast<double>(comps.size()));
  for (std::size_t i = 0; i < comps.size(); ++i) {
    const std::string cw = where + ".components[" + std::to_string(i) + "]";
    const json& c = comps[i];
    require_object(c, cw);
    reject_unknown(c, {"rho", "theta", "v", "delta1", "delta2"}, cw);
    CopulaParams p;
    p.family = fam;
    if (c.contains("rho")) p.rho = get_number(c, "rho", cw);
    if (c.contains("theta")) p.theta = get_number(c, "theta", cw);
    p.v = c.contains("v") ? get_number(c, "v", cw) : (j.contains("v") ? get_number(j, "v", where) : p.v);
    p.delta1 = c.contains("delta1") ? get_number(c, "delta1", cw) : (j.contains("delta1") ? get_number(j, "delta1", where) : 0.0);
    p.delta2 = c.contains("delta2") ? get_number(c, "delta2", cw) : (j.contains("delta2") ? get_number(j, "delta2", where) : 0.0);
    mix.components.push_back(p);
  }
  if (auto e = check(mix)) throw ConfigError(where + ": " + *e);
  return mix;
}

ModelParams model_from_json(const json& j) {
  require_object(j, "model");
  reject_unknown(j, {"margins", "copula"}, "model");
  if (!j.contains("margins") || !j.at("margins").is_array() || j.at("margins").size() != 2) {
    throw ConfigError("model.margins: expected an array of two margins");
  }
  if (!j.contains("copula")) throw ConfigError("model: missing key 'copula'");
  ModelParams theta;
  theta.m1 = marginal_from_json(j.at("margins")[0]);
  theta.m2 = marginal_from_json(j.at("margins")[1]);
  theta.dep = copula_from_json(j.at("copula"));
  return theta;
}

PriorConfig prior_from_json(const json& j) {
  require_object(j, "prior");
  PriorConfig p;
  if (!j.contains("margins") || !j.at("margins").is_array() || j.at("margins").size() != 2) {
    throw ConfigError("prior.margins: expected an array of two margins");
  }
  for (std::size_t i = 0; i < 2; ++i) {
    const json& m = j.at("margins")[i];
    const std::string where = "prior.margins[" + std::to_string(i) + "]";
    MarginPrior& mp = p.margins[i];
    mp.eta_shape = get_vector(m, "eta_shape", where);
    mp.eta_mean = get_vector(m, "eta_mean", where);
    mp.mu_shape = get_vector(m, "mu_shape", where);
    mp.mu_mean = get_vector(m, "mu_mean", where);
    mp.u_mean = get_number(m, "u_mean", where);
    mp.u_sd = get_number(m, "u_sd", where);
  }
  if (j.contains("df_poisson_mean")) p.df_poisson_mean = get_number(j, "df_poisson_mean", "prior");
  if (j.contains("phi_c")) p.phi_c = get_number(j, "phi_c", "prior");
  return p;
}

McmcSchedule schedule_from_json(const json& j, McmcSchedule s) {
  const std::string where = "mcmc";
  require_object(j, where);
  reject_unknown(j, {"iterations", "burn_in", "thin", "adapt_batch", "target_accept", "dirichlet_concentration"}, where);
  if (j.contains("iterations")) s.iterations = get_count(j, "iterations", where);
  if (j.contains("burn_in")) s.burn_in = get_count(j, "burn_in", where);
  if (j.contains("thin")) s.thin = get_count(j, "thin", where);
  if (j.contains("adapt_batch")) s.adapt_batch = get_count(j, "adapt_batch", where);
  if (j.contains("target_accept")) s.target_accept = get_number(j, "target_accept", where);
  if (j.contains("dirichlet_concentration")) s.dirichlet_concentration = get_number(j, "dirichlet_concentration", where);
  return s;
}

FitConfig fit_config_from_json(const json& j) {
  require_object(j, "config");
  // "model" and "n" drive the simulate command.
  reject_unknown(j,
                 {"family", "copula_components", "gamma_components", "prior", "mcmc", "seed", "chains", "data", "out",
                  "holdout_fraction", "holdout_indices", "init", "fixed_blocks", "model", "n"},
                 "config");
  FitConfig cfg;
  try {
    if (j.contains("family")) cfg.family = get_family(j.at("family"), "family");
    if (j.contains("copula_components")) cfg.copula_components = get_count(j, "copula_components", "config");
    if (j.contains("gamma_components")) {
      const json& g = j.at("gamma_components");
      if (g.is_number_integer()) {
        cfg.gamma_components = {g.get<std::size_t>(), g.get<std::size_t>()};
      } else if (g.is_array() && g.size() == 2 && g[0].is_number_integer() && g[1].is_number_integer()) {
        cfg.gamma_components = {g[0].get<std::size_t>(), g[1].get<std::size_t>()};
      } else {
        throw ConfigError("gamma_components: expected an integer or a pair of integers");
      }
    }
    if (j.contains("prior")) {
      const json& p = j.at("prior");
      require_object(p, "prior");
      reject_unknown(p, {"margins", "df_poisson_mean", "phi_c"}, "prior");
      if (p.contains("df_poisson_mean")) cfg.df_poisson_mean = get_number(p, "df_poisson_mean", "prior");
      if (p.contains("phi_c")) cfg.phi_c = get_number(p, "phi_c", "prior");
      if (p.contains("margins")) {
        const json& ms = p.at("margins");
        if (!ms.is_array() || ms.size() != 2) throw ConfigError("prior.margins: expected an array of two objects");
        for (std::size_t i = 0; i < 2; ++i) {
          const std::string where = "prior.margins[" + std::to_string(i) + "]";
          const json& m = ms[i];
          require_object(m, where);
          reject_unknown(m, {"eta_shape", "eta_mean", "mu_shape", "mu_mean", "u_mean", "u_sd"}, where);
          MarginPriorSpec& s = cfg.prior[i];
          if (m.contains("eta_shape")) s.eta_shape = get_vector(m, "eta_shape", where);
          if (m.contains("eta_mean")) s.eta_mean = get_vector(m, "eta_mean", where);
          if (m.contains("mu_shape")) s.mu_shape = get_vector(m, "mu_shape", where);
          if (m.contains("mu_mean")) s.mu_mean = get_vector(m, "mu_mean", where);
          if (m.contains("u_mean")) s.u_mean = get_number(m, "u_mean", where);
          if (m.contains("u_sd")) s.u_sd = get_number(m, "u_sd", where);
        }
      }
    }
    if (j.contains("mcmc")) cfg.schedule = schedule_from_json(j.at("mcmc"));
    if (j.contains("seed")) {
      if (!j.at("seed").is_number_integer()) throw ConfigError("seed: expected an integer");
      cfg.seed = j.at("seed").get<std::uint64_t>();
    }
    if (j.contains("chains")) cfg.chains = get_count(j, "chains", "config");
    if (j.contains("data")) {
      if (!j.at("data").is_string()) throw ConfigError("data: expected a path string");
      cfg.data_path = j.at("data").get<std::string>();
    }
    if (j.contains("out")) {
      if (!j.at("out").is_string()) throw ConfigError("out: expected a path string");
      cfg.out_prefix = j.at("out").get<std::string>();
    }
    if (j.contains("holdout_fraction")) cfg.holdout_fraction = get_number(j, "holdout_fraction", "config");
    if (j.contains("holdout_indices")) {
      const json& h = j.at("holdout_indices");
      if (!h.is_array()) throw ConfigError("holdout_indices: expected an array of row indices");
      for (const auto& x : h) {
        if (!x.is_number_integer() || x.get<long long>() < 0) {
          throw ConfigError("holdout_indices: expected nonnegative integers");
        }
        cfg.holdout_indices.push_back(x.get<std::size_t>());
      }
    }
    if (j.contains("init")) cfg.init = model_from_json(j.at("init"));
    if (j.contains("fixed_blocks")) {
      const json& f = j.at("fixed_blocks");
      if (!f.is_array()) throw ConfigError("fixed_blocks: expected an array of block names");
      for (const auto& x : f) {
        if (!x.is_string()) throw ConfigError("fixed_blocks: expected block names as strings");
        cfg.fixed_blocks.push_back(x.get<std::string>());
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  validate(cfg);
  return cfg;
}

}  // namespace bivex
