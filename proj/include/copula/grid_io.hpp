#pragma once

// Shared on-disk form of empirical histograms and analytic grids: a CSV of B
// rows (u-bins) by B columns (v-bins) plus a JSON sidecar
// {bins, kind, model, parameters, sample_count, pair_count}.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>

#include "copula/grid.hpp"
#include "json.hpp"

namespace copula::grid_io {

struct GridFile {
  DensityGrid grid;
  nlohmann::json sidecar;
};

nlohmann::json make_sidecar(int bins, const std::string& kind, const std::string& model,
                            const nlohmann::json& parameters, std::int64_t sample_count,
                            std::int64_t pair_count);

void write_grid_csv(std::ostream& out, const DensityGrid& grid);
DensityGrid read_grid_csv(std::istream& in);

// "x.csv" -> "x.json".
std::filesystem::path sidecar_path(const std::filesystem::path& csv_path);

// Creates missing parent directories.
void save_grid(const std::filesystem::path& csv_path, const DensityGrid& grid,
               const nlohmann::json& sidecar);
// The sidecar is optional on load; an empty object stands in for it.
GridFile load_grid(const std::filesystem::path& csv_path);

}  // namespace copula::grid_io
