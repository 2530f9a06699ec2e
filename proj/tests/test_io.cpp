#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <set>
#include <unistd.h>

#include "bivex/error.hpp"
#include "bivex/io.hpp"

using namespace bivex;
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() / ("bivex_test_io_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

ModelParams base(const CopulaMixture& dep) {
  ModelParams t;
  t.m1.bulk = {{0.6, 0.4}, {2.0, 5.0}, {2.0, 6.0}};
  t.m1.tail = {0.2, 2.0, 7.5};
  t.m2.bulk = {{1.0}, {2.0}, {3.0}};
  t.m2.tail = {0.1, 1.5, 5.0};
  t.dep = dep;
  return t;
}

}  // namespace

TEST_CASE("dataset parsing") {
  const Dataset a = parse_dataset("1.0,2.0\n3.0,4.0");
  REQUIRE(a.size() == 2);
  CHECK(a.pairs[1][0] == 3.0);
  CHECK(a.pairs[1][1] == 4.0);

  const Dataset h = parse_dataset("x1,x2\n1.5,2.5\n\n3,4\n");
  CHECK(h.size() == 2);
  CHECK(h.labels[0] == "x1");
  CHECK(h.labels[1] == "x2");

  const Dataset crlf = parse_dataset("a,b\r\n1e-3, 7\r\n");
  CHECK(crlf.pairs[0][0] == 1e-3);
  CHECK(crlf.pairs[0][1] == 7.0);

  try {
    parse_dataset("1.0,-2.0");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.row() == 1);
    CHECK(e.column() == 2);
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
  try {
    parse_dataset("x,y\n1,2\n3,abc\n");
    FAIL("expected DataError");
  } catch (const DataError& e) {
    CHECK(e.row() == 2);
    CHECK(e.column() == 2);
  }
  CHECK_THROWS_AS(parse_dataset("1,2,3\n"), DataError);
  CHECK_THROWS_AS(parse_dataset("1,0\n"), DataError);
  CHECK_THROWS_AS(parse_dataset("1,inf\n"), DataError);
  CHECK_THROWS_AS(parse_dataset("1,nan\n"), DataError);
  CHECK_THROWS_AS(parse_dataset("x1,x2\n"), DataError);
  CHECK_THROWS_AS(parse_dataset(""), DataError);
  CHECK_THROWS_AS(load_dataset((scratch_dir() / "missing.csv").string()), IoError);
}

TEST_CASE("dataset files round trip exactly") {
  Dataset d;
  d.labels = {"flow_a", "flow_b"};
  std::mt19937_64 rng(4);
  std::exponential_distribution<double> ex(0.3);
  for (int i = 0; i < 200; ++i) d.pairs.push_back({ex(rng), ex(rng)});
  const std::string path = (scratch_dir() / "data.csv").string();
  write_dataset(path, d);
  const Dataset back = load_dataset(path);
  CHECK(back.pairs == d.pairs);
  CHECK(back.labels == d.labels);
  for (double x : {0.1, 1.0 / 3.0, 6.02214076e23, 5e-324, -2.5}) CHECK(std::strtod(format_double(x).c_str(), nullptr) == x);
}

TEST_CASE("holdout selection") {
  const auto a = choose_holdout(1500, 1.0 / 3.0, 9);
  const auto b = choose_holdout(1500, 1.0 / 3.0, 9);
  const auto c = choose_holdout(1500, 1.0 / 3.0, 10);
  CHECK(a == b);
  CHECK(a != c);
  CHECK(a.size() == 500);
  CHECK(std::is_sorted(a.begin(), a.end()));
  CHECK(std::set<std::size_t>(a.begin(), a.end()).size() == 500);
  CHECK(a.back() < 1500);
  CHECK(choose_holdout(10, 0.0, 1).empty());

  Dataset d;
  for (int i = 1; i <= 6; ++i) d.pairs.push_back({static_cast<double>(i), 1.0});
  const auto [train, test] = split_holdout(d, {1, 4});
  CHECK(train.size() == 4);
  REQUIRE(test.size() == 2);
  CHECK(test.pairs[0][0] == 2.0);
  CHECK(test.pairs[1][0] == 5.0);
  CHECK_THROWS_AS(split_holdout(d, {6}), DataError);
}

TEST_CASE("chain csv round trip reproduces summaries") {
  const ModelParams truth = base({{1.0}, {{CopulaFamily::T, 0.5, 6.0}}});
  Rng rng(2);
  const Dataset data = model_sample(truth, 120, rng);
  FitConfig cfg;
  cfg.family = CopulaFamily::T;
  cfg.gamma_components = {2, 1};
  cfg.schedule.iterations = 600;
  cfg.schedule.burn_in = 200;
  cfg.schedule.thin = 4;
  const Chain chain = run_chain(data, cfg, 77);
  const std::string path = (scratch_dir() / "chain.csv").string();
  write_chain_csv(path, chain);
  write_json(metadata_path(path), chain_metadata(chain, cfg, {}));
  CHECK(metadata_path(path) == (scratch_dir() / "chain.meta.json").string());

  const Chain back = read_chain_csv(path);
  REQUIRE(back.size() == chain.size());
  CHECK(back.seed == 77);
  CHECK(back.schedule.iterations == 600);
  for (std::size_t i = 0; i < chain.size(); ++i) {
    REQUIRE(flatten(back.draws[i]) == flatten(chain.draws[i]));
    REQUIRE(back.log_post[i] == chain.log_post[i]);
    REQUIRE(back.iteration[i] == chain.iteration[i]);
  }
  CHECK(chain_csv_text(back) == chain_csv_text(chain));
  CHECK(phi_criterion(back, 10.0) == phi_criterion(chain, 10.0));
  const auto q0 = quantile_posterior(chain, 1, 0.99);
  const auto q1 = quantile_posterior(back, 1, 0.99);
  CHECK(q0.mean == q1.mean);
  CHECK(q0.hi == q1.hi);
  const auto [c0, b0] = dependence_curves(chain, {0.9, 0.99});
  const auto [c1, b1] = dependence_curves(back, {0.9, 0.99});
  CHECK(c0.mean == c1.mean);
  CHECK(b0.hi == b1.hi);
  CHECK(information_criteria(chain, data).dic == information_criteria(back, data).dic);

  const json meta = read_json(metadata_path(path));
  CHECK(meta.at("family") == "t");
  CHECK(meta.at("retained") == chain.size());
  CHECK(meta.at("acceptance_rates").contains("rho[1]"));
  CHECK(meta.at("config").at("prior").at("margins").size() == 2);
}

TEST_CASE("chain files without metadata") {
  const ModelParams g = base({{0.3, 0.7}, {{CopulaFamily::Gumbel, 0, 10, 0, 0, 1.5}, {CopulaFamily::Gumbel, 0, 10, 0, 0, 3.0}}});
  Chain c;
  c.draws = {g, g};
  c.iteration = {1, 2};
  c.log_post = {-1.0, -2.0};
  c.log_lik = {-0.5, -1.5};
  const std::string path = (scratch_dir() / "gumbel.csv").string();
  write_chain_csv(path, c);
  CHECK_THROWS_AS(read_chain_csv(path), DataError);
  const Chain back = read_chain_csv(path, CopulaFamily::Gumbel);
  CHECK(back.draws[1].dep.components[1].theta == 3.0);
  CHECK_THROWS_AS(read_chain_csv(path, CopulaFamily::T), DataError);

  const ModelParams s = base({{1.0}, {{CopulaFamily::SkewNormal, 0.2, 10.0, 0.4, -0.1}}});
  c.draws = {s};
  c.iteration = {1};
  const std::string sp = (scratch_dir() / "skew.csv").string();
  write_chain_csv(sp, c);
  CHECK(read_chain_csv(sp).draws[0].dep.family() == CopulaFamily::SkewNormal);

  std::ofstream(scratch_dir() / "bad.csv") << "a,b,c\n1,2,3\n";
  CHECK_THROWS_AS(read_chain_csv((scratch_dir() / "bad.csv").string()), DataError);
}

TEST_CASE("fit configuration json") {
  const json j = json::parse(R"({
    "family": "skew_t", "copula_components": 1, "gamma_components": [2, 3],
    "prior": {"df_poisson_mean": 20, "phi_c": 8, "margins": [{"u_mean": 5.0}, {"u_sd": 0.5}]},
    "mcmc": {"iterations": 2000, "burn_in": 500, "thin": 5},
    "seed": 12, "data": "d.csv", "out": "run/chain", "holdout_fraction": 0.25,
    "fixed_blocks": ["delta1"]
  })");
  const FitConfig cfg = fit_config_from_json(j);
  CHECK(cfg.family == CopulaFamily::SkewT);
  CHECK(cfg.gamma_components[1] == 3);
  CHECK(cfg.df_poisson_mean == 20.0);
  CHECK(*cfg.prior[0].u_mean == 5.0);
  CHECK(*cfg.prior[1].u_sd == 0.5);
  CHECK(cfg.schedule.retained() == 300);
  CHECK(cfg.seed == 12);
  CHECK(cfg.fixed_blocks == std::vector<std::string>{"delta1"});
  const FitConfig again = fit_config_from_json(to_json(cfg));
  CHECK(to_json(again) == to_json(cfg));

  CHECK_THROWS_AS(fit_config_from_json(json::parse(R"({"famly": "t"})")), ConfigError);
  CHECK_THROWS_AS(fit_config_from_json(json::parse(R"({"family": "clayton"})")), ConfigError);
  CHECK_THROWS_AS(fit_config_from_json(json::parse(R"({"mcmc": {"iterations": 10, "burn_in": 10}})")), ConfigError);
  CHECK_THROWS_AS(fit_config_from_json(json::parse(R"({"family": "skew_t", "copula_components": 2})")), ConfigError);
  CHECK_THROWS_AS(fit_config_from_json(json::parse(R"({"seed": "x"})")), ConfigError);
  CHECK_THROWS_AS(fit_config_from_json(json::parse(R"({"fixed_blocks": "rho[1]"})")), ConfigError);

  const ModelParams m = base({{0.4, 0.6}, {{CopulaFamily::T, -0.2, 7.0}, {CopulaFamily::T, 0.5, 7.0}}});
  const ModelParams mb = model_from_json(to_json(m));
  CHECK(flatten(mb) == flatten(m));
  CHECK(mb.dep.family() == CopulaFamily::T);
}
