#include "bivex/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "bivex/error.hpp"

namespace bivex {

using nlohmann::json;

namespace {

std::string trim(std::string_view s) {
  std::size_t a = 0;
  std::size_t b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(trim(cur));
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(trim(cur));
  return out;
}

std::optional<double> parse_number(const std::string& s) {
  if (s.empty()) return std::nullopt;
  const char* first = s.data();
  if (*first == '+') ++first;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    // from_chars does not accept "inf"/"nan" spellings in every case; fall back.
    char* end = nullptr;
    v = std::strtod(s.c_str(), &end);
    if (end != s.c_str() + s.size()) return std::nullopt;
  }
  return v;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("error reading '" + path + "'");
  return ss.str();
}

void write_file(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) {
    std::error_code ec;
    std::filesystem::create_directories(p.parent_path(), ec);
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("error writing '" + path + "'");
}

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(text);
  while (std::getline(in, cur)) {
    if (!cur.empty() && cur.back() == '\r') cur.pop_back();
    out.push_back(cur);
  }
  return out;
}

std::size_t count_prefix(const std::vector<std::string>& names, const std::string& prefix) {
  std::size_t n = 0;
  while (std::find(names.begin(), names.end(), prefix + std::to_string(n + 1)) != names.end()) ++n;
  return n;
}

bool has_column(const std::vector<std::string>& names, const std::string& c) {
  return std::find(names.begin(), names.end(), c) != names.end();
}

}  // namespace

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

Dataset parse_dataset(const std::string& text) {
  Dataset d;
  const auto lines = lines_of(text);
  bool first = true;
  std::size_t row = 0;
  for (std::size_t ln = 0; ln < lines.size(); ++ln) {
    const std::string line = trim(lines[ln]);
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (first) {
      first = false;
      if (f.size() == 2 && (!parse_number(f[0]) || !parse_number(f[1]))) {
        d.labels = {f[0], f[1]};
        continue;
      }
    }
    ++row;
    if (f.size() != 2) {
      throw DataError("row " + std::to_string(row) + " (line " + std::to_string(ln + 1) + "): expected 2 columns, found " +
                          std::to_string(f.size()),
                      row, 0);
    }
    std::array<double, 2> pair{};
    for (std::size_t c = 0; c < 2; ++c) {
      const auto v = parse_number(f[c]);
      const std::string where = "row " + std::to_string(row) + " (line " + std::to_string(ln + 1) + "), column " +
                                std::to_string(c + 1);
      if (!v) throw DataError(where + ": '" + f[c] + "' is not a number", row, c + 1);
      if (!std::isfinite(*v) || !(*v > 0.0)) throw DataError(where + ": values must be finite and positive", row, c + 1);
      pair[c] = *v;
    }
    d.pairs.push_back(pair);
  }
  if (d.pairs.empty()) throw DataError("dataset contains no data rows");
  return d;
}

Dataset load_dataset(const std::string& path) { return parse_dataset(read_file(path)); }

void write_dataset(const std::string& path, const Dataset& data) {
  std::string out = data.labels[0] + "," + data.labels[1] + "\n";
  for (const auto& p : data.pairs) out += format_double(p[0]) + "," + format_double(p[1]) + "\n";
  write_file(path, out);
}

std::pair<Dataset, Dataset> split_holdout(const Dataset& data, const std::vector<std::size_t>& indices) {
  std::vector<char> held(data.size(), 0);
  for (std::size_t i : indices) {
    if (i >= data.size()) throw DataError("holdout index " + std::to_string(i) + " is out of range");
    held[i] = 1;
  }
  Dataset train, test;
  train.labels = test.labels = data.labels;
  for (std::size_t i = 0; i < data.size(); ++i) (held[i] ? test : train).pairs.push_back(data.pairs[i]);
  return {train, test};
}

std::vector<std::size_t> choose_holdout(std::size_t n, double fraction, std::uint64_t seed) {
  const auto k = static_cast<std::size_t>(std::llround(fraction * static_cast<double>(n)));
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0);
  Rng rng(seed);
  // Partial Fisher-Yates with an explicit draw so results do not depend on
  // the standard library's shuffle implementation.
  for (std::size_t i = 0; i < k && i < n; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng() % (n - i));
    std::swap(idx[i], idx[j]);
  }
  idx.resize(std::min(k, n));
  std::sort(idx.begin(), idx.end());
  return idx;
}

std::string chain_csv_text(const Chain& chain) {
  if (chain.draws.empty()) throw ParameterError("chain has no retained draws");
  std::string out = "iter,log_post,log_lik";
  for (const auto& n : parameter_names(chain.draws.front())) out += "," + n;
  out += "\n";
  for (std::size_t i = 0; i < chain.size(); ++i) {
    out += std::to_string(i < chain.iteration.size() ? chain.iteration[i] : i + 1);
    out += "," + format_double(i < chain.log_post.size() ? chain.log_post[i] : std::nan(""));
    out += "," + format_double(i < chain.log_lik.size() ? chain.log_lik[i] : std::nan(""));
    for (double v : flatten(chain.draws[i])) out += "," + format_double(v);
    out += "\n";
  }
  return out;
}

void write_chain_csv(const std::string& path, const Chain& chain) { write_file(path, chain_csv_text(chain)); }

json chain_metadata(const Chain& chain, const FitConfig& cfg, const std::vector<std::size_t>& holdout) {
  json scales = json::object();
  json rates = json::object();
  for (std::size_t b = 0; b < chain.blocks.size(); ++b) {
    const std::string name = chain.blocks[b].name();
    if (b < chain.final_log_scale.size() && chain.blocks[b].adaptive()) scales[name] = std::exp(chain.final_log_scale[b]);
    if (b < chain.proposed.size() && chain.proposed[b] > 0) {
      rates[name] = static_cast<double>(chain.accepted[b]) / static_cast<double>(chain.proposed[b]);
    }
  }
  json trace = json::array();
  for (const auto& rec : chain.adaptation) {
    trace.push_back(json{{"iteration", rec.iteration}, {"log_scale", rec.log_scale}, {"accept_rate", rec.accept_rate}});
  }
  json blocks = json::array();
  for (const auto& b : chain.blocks) blocks.push_back(b.name());
  json resolved = to_json(cfg);
  resolved["prior"] = to_json(chain.prior);
  return json{{"seed", chain.seed},
              {"family", std::string(to_string(cfg.family))},
              {"schedule", to_json(chain.schedule)},
              {"retained", chain.size()},
              {"blocks", blocks},
              {"final_scales", scales},
              {"acceptance_rates", rates},
              {"adaptation", trace},
              {"holdout_indices", holdout},
              {"initial", to_json(chain.initial)},
              {"config", resolved}};
}

void write_json(const std::string& path, const json& j) { write_file(path, j.dump(2) + "\n"); }

json read_json(const std::string& path) {
  const std::string text = read_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError("'" + path + "' is not valid JSON: " + e.what());
  }
}

std::string metadata_path(const std::string& chain_csv) {
  std::string base = chain_csv;
  if (base.size() > 4 && base.compare(base.size() - 4, 4, ".csv") == 0) base.resize(base.size() - 4);
  return base + ".meta.json";
}

Chain read_chain_csv(const std::string& path, std::optional<CopulaFamily> family) {
  const auto lines = lines_of(read_file(path));
  if (lines.empty()) throw DataError("chain file '" + path + "' is empty");
  const auto names_all = split_fields(lines[0]);
  if (names_all.size() < 4 || names_all[0] != "iter" || names_all[1] != "log_post" || names_all[2] != "log_lik") {
    throw DataError("chain file '" + path + "' lacks the iter,log_post,log_lik header", 1, 0);
  }
  const std::vector<std::string> names(names_all.begin() + 3, names_all.end());

  Chain chain;
  if (!family) {
    const std::string meta = metadata_path(path);
    if (std::filesystem::exists(meta)) {
      const json m = read_json(meta);
      if (m.contains("family") && m.at("family").is_string()) {
        family = copula_family_from_string(m.at("family").get<std::string>());
      }
      if (m.contains("seed") && m.at("seed").is_number_integer()) chain.seed = m.at("seed").get<std::uint64_t>();
      if (m.contains("schedule")) chain.schedule = schedule_from_json(m.at("schedule"));
    }
  }
  const std::size_t ncop = count_prefix(names, "cop_w");
  const bool rho = has_column(names, "cop_rho1");
  const bool df = has_column(names, "cop_v");
  const bool skew = has_column(names, "cop_delta1");
  if (!family) {
    if (!rho) throw DataError("cannot tell the copula family of '" + path + "'; pass it explicitly");
    family = skew ? (df ? CopulaFamily::SkewT : CopulaFamily::SkewNormal) : (df ? CopulaFamily::T : CopulaFamily::Gaussian);
  }
  const ModelParams layout = make_layout(*family, ncop, count_prefix(names, "m1_w"), count_prefix(names, "m2_w"));
  if (parameter_names(layout) != names) {
    throw DataError("chain file '" + path + "' columns do not match the " + std::string(to_string(*family)) +
                        " layout",
                    1, 0);
  }

  for (std::size_t ln = 1; ln < lines.size(); ++ln) {
    if (trim(lines[ln]).empty()) continue;
    const auto f = split_fields(lines[ln]);
    if (f.size() != names_all.size()) {
      throw DataError("chain file line " + std::to_string(ln + 1) + ": wrong number of fields", ln + 1, 0);
    }
    std::vector<double> v(f.size());
    for (std::size_t c = 0; c < f.size(); ++c) {
      const auto x = parse_number(f[c]);
      if (!x) throw DataError("chain file line " + std::to_string(ln + 1) + ": bad number '" + f[c] + "'", ln + 1, c + 1);
      v[c] = *x;
    }
    chain.iteration.push_back(static_cast<std::size_t>(v[0]));
    chain.log_post.push_back(v[1]);
    chain.log_lik.push_back(v[2]);
    chain.draws.push_back(unflatten(layout, std::vector<double>(v.begin() + 3, v.end())));
  }
  if (chain.draws.empty()) throw DataError("chain file '" + path + "' has no draws");
  return chain;
}

json to_json(const PosteriorSummary& s) {
  return json{{"mean", s.mean}, {"sd", s.sd}, {"lo", s.lo}, {"hi", s.hi}, {"ess", s.ess}, {"n", s.n}};
}

json to_json(const InformationCriteria& ic) {
  return json{{"bic", ic.bic},
              {"dic", ic.dic},
              {"p_d", ic.p_d},
              {"mean_deviance", ic.mean_deviance},
              {"deviance_at_mean", ic.deviance_at_mean},
              {"max_log_lik", ic.max_log_lik},
              {"k", ic.k},
              {"m", ic.m}};
}

void write_curve_csv(const std::string& path, const CurveEstimate& c) {
  std::string out = "u,mean,lo,hi\n";
  for (std::size_t i = 0; i < c.u.size(); ++i) {
    out += format_double(c.u[i]) + "," + format_double(c.mean[i]) + "," + format_double(c.lo[i]) + "," +
           format_double(c.hi[i]) + "\n";
  }
  write_file(path, out);
}

void write_map_csv(const std::string& path, const std::vector<std::array<double, 2>>& grid,
                   const std::vector<double>& prob) {
  std::string out = "x1,x2,prob\n";
  for (std::size_t i = 0; i < grid.size(); ++i) {
    out += format_double(grid[i][0]) + "," + format_double(grid[i][1]) + "," + format_double(prob[i]) + "\n";
  }
  write_file(path, out);
}

}  // namespace bivex
