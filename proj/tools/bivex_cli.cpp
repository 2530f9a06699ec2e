// Command-line front end.

#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "bivex/analysis.hpp"
#include "bivex/config.hpp"
#include "bivex/error.hpp"
#include "bivex/io.hpp"
#include "bivex/mcmc.hpp"
#include "bivex/model.hpp"

namespace {

using nlohmann::json;
using namespace bivex;

enum ExitCode : int { kOk = 0, kRuntime = 1, kUsage = 2, kIo = 3, kConfig = 4, kData = 5 };

constexpr const char* kExitCodes =
    "Exit codes:\n"
    "  0  success\n"
    "  1  runtime or numerical failure\n"
    "  2  usage error (unknown flag, bad value)\n"
    "  3  missing or unreadable/unwritable file\n"
    "  4  configuration schema violation\n"
    "  5  invalid data\n";

struct Common {
  std::optional<std::uint64_t> seed;
  std::string config;
  std::string out;
};

void add_common(CLI::App* app, Common& c, const std::string& out_help) {
  app->add_option("--seed", c.seed, "RNG seed (overrides the config)");
  app->add_option("--config", c.config, "JSON configuration file");
  app->add_option("--out", c.out, out_help);
}

json load_config_json(const std::string& path) { return path.empty() ? json::object() : read_json(path); }

FitConfig load_fit_config(const Common& c) {
  FitConfig cfg = fit_config_from_json(load_config_json(c.config));
  if (c.seed) cfg.seed = *c.seed;
  return cfg;
}

std::string strip_csv(const std::string& path) {
  if (path.size() > 4 && path.compare(path.size() - 4, 4, ".csv") == 0) return path.substr(0, path.size() - 4);
  if (path.size() > 5 && path.compare(path.size() - 5, 5, ".json") == 0) return path.substr(0, path.size() - 5);
  return path;
}

void echo_config(const std::string& out, const json& resolved) { write_json(strip_csv(out) + ".config.json", resolved); }

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::string cur;
  for (char ch : text + ",") {
    if (ch == ',') {
      if (!cur.empty()) out.push_back(std::stod(cur));
      cur.clear();
    } else if (ch != ' ') {
      cur.push_back(ch);
    }
  }
  return out;
}

void print_json(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------------------

int cmd_simulate(const Common& c, std::optional<std::size_t> n_flag) {
  const json cfg_json = load_config_json(c.config);
  if (!cfg_json.contains("model")) throw ConfigError("simulate: the config needs a 'model' object");
  FitConfig cfg = fit_config_from_json(cfg_json);
  if (c.seed) cfg.seed = *c.seed;
  const ModelParams theta = model_from_json(cfg_json.at("model"));
  std::size_t n = 1000;
  if (cfg_json.contains("n")) {
    if (!cfg_json.at("n").is_number_integer() || cfg_json.at("n").get<long long>() <= 0) {
      throw ConfigError("n: expected a positive integer");
    }
    n = cfg_json.at("n").get<std::size_t>();
  }
  if (n_flag) n = *n_flag;
  Rng rng(cfg.seed);
  const Dataset data = model_sample(theta, n, rng);
  const std::string out = c.out.empty() ? "simulated.csv" : c.out;
  write_dataset(out, data);
  echo_config(out, json{{"command", "simulate"}, {"seed", cfg.seed}, {"n", n}, {"model", to_json(theta)}});
  std::cout << "wrote " << n << " rows to " << out << "\n";
  return kOk;
}

int cmd_fit(const Common& c, const std::string& data_flag, std::optional<std::size_t> chains_flag,
            std::optional<std::size_t> iters, std::optional<std::size_t> burn, std::optional<std::size_t> thin) {
  FitConfig cfg = load_fit_config(c);
  if (!data_flag.empty()) cfg.data_path = data_flag;
  if (!c.out.empty()) cfg.out_prefix = strip_csv(c.out);
  if (chains_flag) cfg.chains = *chains_flag;
  if (iters) cfg.schedule.iterations = *iters;
  if (burn) cfg.schedule.burn_in = *burn;
  if (thin) cfg.schedule.thin = *thin;
  validate(cfg);
  if (cfg.data_path.empty()) throw ConfigError("fit: no data file given (use --data or the 'data' key)");

  const Dataset all = load_dataset(cfg.data_path);
  std::vector<std::size_t> holdout = cfg.holdout_indices;
  if (holdout.empty() && cfg.holdout_fraction > 0.0) holdout = choose_holdout(all.size(), cfg.holdout_fraction, cfg.seed);
  const auto [train, test] = split_holdout(all, holdout);
  validate(train);

  std::vector<Chain> chains(cfg.chains);
  std::vector<std::exception_ptr> errors(cfg.chains);
  std::vector<std::thread> workers;
  for (std::size_t k = 0; k < cfg.chains; ++k) {
    workers.emplace_back([&, k]() {
      try {
        chains[k] = run_chain(train, cfg, cfg.seed + k);
      } catch (...) {
        errors[k] = std::current_exception();
      }
    });
  }
  for (auto& w : workers) w.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  for (std::size_t k = 0; k < cfg.chains; ++k) {
    const std::string prefix = cfg.chains == 1 ? cfg.out_prefix : cfg.out_prefix + "_" + std::to_string(k + 1);
    write_chain_csv(prefix + ".csv", chains[k]);
    json meta = chain_metadata(chains[k], cfg, holdout);
    write_json(prefix + ".meta.json", meta);
    echo_config(prefix, meta.at("config"));
    std::cout << "wrote " << chains[k].size() << " draws to " << prefix << ".csv\n";
  }
  if (!holdout.empty()) write_dataset(cfg.out_prefix + ".holdout.csv", test);
  return kOk;
}

Chain load_chain(const std::string& path, const std::string& family) {
  if (path.empty()) throw ConfigError("no chain file given (use --chain)");
  std::optional<CopulaFamily> fam;
  if (!family.empty()) {
    try {
      fam = copula_family_from_string(family);
    } catch (const ParameterError& e) {
      throw std::invalid_argument(std::string("--family: ") + e.what());
    }
  }
  return read_chain_csv(path, fam);
}

void emit(const Common& c, const json& result, const json& echo) {
  if (c.out.empty()) {
    print_json(result);
  } else {
    write_json(c.out, result);
    echo_config(c.out, echo);
  }
}

int cmd_summarize(const Common& c, const std::string& chain_path, const std::string& family, double threshold) {
  const Chain chain = load_chain(chain_path, family);
  json params = json::object();
  for (const auto& [name, s] : parameter_summaries(chain)) params[name] = to_json(s);
  const auto w = mean_copula_weights(chain);
  json result{{"draws", chain.size()},
              {"parameters", params},
              {"log_lik", to_json(summarize(chain.log_lik))},
              {"copula_weight_means", w},
              {"nonzero_weight_threshold", threshold},
              {"nonzero_copula_weights", nonzero_weight_count(chain, threshold)}};
  emit(c, result, json{{"command", "summarize"}, {"chain", chain_path}, {"threshold", threshold}});
  return kOk;
}

int cmd_dependence(const Common& c, const std::string& chain_path, const std::string& family, const std::string& grid) {
  const Chain chain = load_chain(chain_path, family);
  const std::vector<double> u = grid.empty() ? std::vector<double>{0.9, 0.95, 0.99, 0.999, 0.9999} : parse_list(grid);
  const auto [chi, chibar] = dependence_curves(chain, u);
  if (c.out.empty()) {
    json j{{"u", chi.u}, {"chi", {{"mean", chi.mean}, {"lo", chi.lo}, {"hi", chi.hi}}},
           {"chibar", {{"mean", chibar.mean}, {"lo", chibar.lo}, {"hi", chibar.hi}}}};
    print_json(j);
  } else {
    const std::string base = strip_csv(c.out);
    write_curve_csv(base + "_chi.csv", chi);
    write_curve_csv(base + "_chibar.csv", chibar);
    echo_config(base, json{{"command", "dependence"}, {"chain", chain_path}, {"u", u}});
  }
  return kOk;
}

int cmd_quantile(const Common& c, const std::string& chain_path, const std::string& family, int margin,
                 const std::string& plist) {
  const Chain chain = load_chain(chain_path, family);
  const std::vector<double> ps = plist.empty() ? std::vector<double>{0.99, 0.995, 0.999} : parse_list(plist);
  json out = json::array();
  for (double p : ps) {
    json s = to_json(quantile_posterior(chain, margin, p));
    s["p"] = p;
    out.push_back(s);
  }
  json result{{"margin", margin}, {"quantiles", out}};
  emit(c, result, json{{"command", "quantile"}, {"chain", chain_path}, {"margin", margin}, {"p", ps}});
  return kOk;
}

int cmd_predict(const Common& c, const std::string& chain_path, const std::string& family, const std::string& grid_file,
                const std::string& x1s, const std::string& x2s) {
  const Chain chain = load_chain(chain_path, family);
  std::vector<std::array<double, 2>> grid;
  if (!grid_file.empty()) {
    grid = load_dataset(grid_file).pairs;
  } else {
    const auto a = parse_list(x1s);
    const auto b = parse_list(x2s);
    if (a.empty() || b.empty()) throw ConfigError("predict: give --grid or both --x1 and --x2");
    for (double x : a) {
      for (double y : b) grid.push_back({x, y});
    }
  }
  const auto prob = predictive_exceedance(chain, grid);
  if (c.out.empty()) {
    json j = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) j.push_back({{"x1", grid[i][0]}, {"x2", grid[i][1]}, {"prob", prob[i]}});
    print_json(j);
  } else {
    write_map_csv(c.out, grid, prob);
    echo_config(c.out, json{{"command", "predict"}, {"chain", chain_path}, {"points", grid.size()}});
  }
  return kOk;
}

int cmd_phi(const Common& c, const std::string& chain_path, const std::string& family, std::optional<double> cut) {
  const Chain chain = load_chain(chain_path, family);
  double threshold = 10.0;
  if (!c.config.empty()) threshold = load_fit_config(c).phi_c;
  if (cut) threshold = *cut;
  const double phi = phi_criterion(chain, threshold);
  if (c.out.empty()) {
    std::cout << format_double(phi) << "\n";
  } else {
    write_json(c.out, json{{"c", threshold}, {"phi", phi}});
    echo_config(c.out, json{{"command", "phi"}, {"chain", chain_path}, {"c", threshold}});
  }
  return kOk;
}

int cmd_ic(const Common& c, const std::string& chain_path, const std::string& family, const std::string& data_path) {
  const Chain chain = load_chain(chain_path, family);
  std::string path = data_path;
  if (path.empty() && !c.config.empty()) path = load_fit_config(c).data_path;
  if (path.empty()) throw ConfigError("ic: no data file given (use --data)");
  Dataset data = load_dataset(path);
  // Refit data excludes any rows held out at fit time.
  const std::string meta = metadata_path(chain_path);
  if (std::filesystem::exists(meta)) {
    const json m = read_json(meta);
    if (m.contains("holdout_indices") && !m.at("holdout_indices").empty()) {
      data = split_holdout(data, m.at("holdout_indices").get<std::vector<std::size_t>>()).first;
    }
  }
  const InformationCriteria ic = information_criteria(chain, data);
  emit(c, to_json(ic), json{{"command", "ic"}, {"chain", chain_path}, {"data", path}});
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiparametric Bayesian bivariate extremes: MGPD margins with copula mixtures"};
  app.footer(kExitCodes);
  app.require_subcommand(1);

  Common common;
  std::optional<std::size_t> n_flag, chains_flag, iters, burn, thin;
  std::string data_flag, chain_path, family, grid, plist, grid_file, x1s, x2s;
  int margin = 1;
  double threshold = 0.05;
  std::optional<double> phi_c;

  auto* sim = app.add_subcommand("simulate", "Draw a dataset from the 'model' in the config");
  add_common(sim, common, "output data CSV");
  sim->add_option("--n", n_flag, "number of pairs (overrides the config)");

  auto* fit = app.add_subcommand("fit", "Run the MCMC sampler; writes chain CSV and metadata JSON");
  add_common(fit, common, "output prefix for <prefix>.csv and <prefix>.meta.json");
  fit->add_option("--data", data_flag, "input data CSV");
  fit->add_option("--chains", chains_flag, "number of chains, seeds seed, seed+1, ...");
  fit->add_option("--iterations", iters, "total iterations");
  fit->add_option("--burn-in", burn, "burn-in iterations");
  fit->add_option("--thin", thin, "thinning interval");

  auto add_chain = [&](CLI::App* a) {
    a->add_option("--chain", chain_path, "chain CSV written by fit")->required();
    a->add_option("--family", family, "copula family when the chain has no metadata sidecar");
  };

  auto* summ = app.add_subcommand("summarize", "Posterior summaries of every parameter");
  add_common(summ, common, "summary JSON (stdout when omitted)");
  add_chain(summ);
  summ->add_option("--threshold", threshold, "posterior-mean weight counted as non-zero");

  auto* dep = app.add_subcommand("dependence", "Posterior chi and chibar curves");
  add_common(dep, common, "prefix for <prefix>_chi.csv and <prefix>_chibar.csv");
  add_chain(dep);
  dep->add_option("--u", grid, "comma-separated u grid");

  auto* qnt = app.add_subcommand("quantile", "Posterior summaries of marginal quantiles");
  add_common(qnt, common, "output JSON");
  add_chain(qnt);
  qnt->add_option("--margin", margin, "margin (1 or 2)")->check(CLI::Range(1, 2));
  qnt->add_option("--p", plist, "comma-separated probabilities");

  auto* pred = app.add_subcommand("predict", "Predictive joint exceedance probabilities");
  add_common(pred, common, "output map CSV (x1,x2,prob)");
  add_chain(pred);
  pred->add_option("--grid", grid_file, "CSV of (x1,x2) points");
  pred->add_option("--x1", x1s, "comma-separated x1 values (grid with --x2)");
  pred->add_option("--x2", x2s, "comma-separated x2 values");

  auto* phi = app.add_subcommand("phi", "Posterior probability that the df exceeds c");
  add_common(phi, common, "output JSON (value printed when omitted)");
  add_chain(phi);
  phi->add_option("--c", phi_c, "cutoff c (default 10)");

  auto* ic = app.add_subcommand("ic", "BIC and DIC");
  add_common(ic, common, "output JSON");
  add_chain(ic);
  ic->add_option("--data", data_flag, "data CSV used for the fit");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*sim) return cmd_simulate(common, n_flag);
    if (*fit) return cmd_fit(common, data_flag, chains_flag, iters, burn, thin);
    if (*summ) return cmd_summarize(common, chain_path, family, threshold);
    if (*dep) return cmd_dependence(common, chain_path, family, grid);
    if (*qnt) return cmd_quantile(common, chain_path, family, margin, plist);
    if (*pred) return cmd_predict(common, chain_path, family, grid_file, x1s, x2s);
    if (*phi) return cmd_phi(common, chain_path, family, phi_c);
    if (*ic) return cmd_ic(common, chain_path, family, data_flag);
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kIo;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kData;
  } catch (const ParameterError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntime;
  }
  return kUsage;
}
