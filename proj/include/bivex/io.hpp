#pragma once

// File formats: data CSV, chain CSV with a JSON metadata sidecar, summary
// JSON, and plot-ready curve and map CSVs.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "bivex/analysis.hpp"
#include "bivex/config.hpp"
#include "bivex/mcmc.hpp"
#include "bivex/model.hpp"

namespace bivex {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double x);

/// Two numeric columns, comma separated, optional header row. Rows with
/// non-finite or nonpositive values raise DataError naming the row.
Dataset parse_dataset(const std::string& text);
Dataset load_dataset(const std::string& path);
void write_dataset(const std::string& path, const Dataset& data);

/// Rows in `indices` go to the second dataset, the rest to the first.
std::pair<Dataset, Dataset> split_holdout(const Dataset& data, const std::vector<std::size_t>& indices);
/// Seeded random choice of round(fraction * n) distinct row indices, sorted.
std::vector<std::size_t> choose_holdout(std::size_t n, double fraction, std::uint64_t seed);

std::string chain_csv_text(const Chain& chain);
void write_chain_csv(const std::string& path, const Chain& chain);

nlohmann::json chain_metadata(const Chain& chain, const FitConfig& cfg, const std::vector<std::size_t>& holdout);
void write_json(const std::string& path, const nlohmann::json& j);
nlohmann::json read_json(const std::string& path);

/// The sidecar path for a chain CSV: "x.csv" -> "x.meta.json".
std::string metadata_path(const std::string& chain_csv);

/// Reads a chain CSV. The family comes from `family` when given, otherwise
/// from the metadata sidecar, otherwise from the column names when they are
/// unambiguous.
Chain read_chain_csv(const std::string& path, std::optional<CopulaFamily> family = std::nullopt);

nlohmann::json to_json(const PosteriorSummary& s);
nlohmann::json to_json(const InformationCriteria& ic);
void write_curve_csv(const std::string& path, const CurveEstimate& c);
void write_map_csv(const std::string& path, const std::vector<std::array<double, 2>>& grid,
                   const std::vector<double>& prob);

}  // namespace bivex
