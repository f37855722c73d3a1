#include "copula/grid_io.hpp"

#include <fstream>
#include <string>

#include "copula/errors.hpp"
#include "copula/text.hpp"

namespace copula::grid_io {

nlohmann::json make_sidecar(int bins, const std::string& kind, const std::string& model,
                            const nlohmann::json& parameters, std::int64_t sample_count,
                            std::int64_t pair_count) {
  nlohmann::json j;
  j["bins"] = bins;
  j["kind"] = kind;
  j["model"] = model.empty() ? nlohmann::json(nullptr) : nlohmann::json(model);
  j["parameters"] = parameters.is_null() ? nlohmann::json::object() : parameters;
  j["sample_count"] = sample_count;
  j["pair_count"] = pair_count;
  return j;
}

void write_grid_csv(std::ostream& out, const DensityGrid& grid) {
  for (int i = 0; i < grid.bins; ++i) {
    for (int j = 0; j < grid.bins; ++j) {
      if (j > 0) out << ',';
      out << text::format_number(grid(i, j));
    }
    out << '\n';
  }
}

DensityGrid read_grid_csv(std::istream& in) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    std::vector<double> row;
    for (const auto& field : text::split_csv_line(t)) {
      const auto v = text::parse_number(field);
      if (!v) {
        fail(ErrorKind::kInvalidInput,
             "grid: line " + std::to_string(line_no) + ": unparseable value '" + field + "'");
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
  }
  const int b = static_cast<int>(rows.size());
  if (b < 2) fail(ErrorKind::kInvalidInput, "grid: need at least 2 rows");
  DensityGrid grid(b);
  for (int i = 0; i < b; ++i) {
    if (static_cast<int>(rows[i].size()) != b) {
      fail(ErrorKind::kInvalidInput, "grid: row " + std::to_string(i + 1) + " has " +
                                         std::to_string(rows[i].size()) + " values, expected " +
                                         std::to_string(b));
    }
    for (int j = 0; j < b; ++j) grid(i, j) = rows[i][j];
  }
  return grid;
}

std::filesystem::path sidecar_path(const std::filesystem::path& csv_path) {
  std::filesystem::path p = csv_path;
  p.replace_extension(".json");
  return p;
}

void save_grid(const std::filesystem::path& csv_path, const DensityGrid& grid,
               const nlohmann::json& sidecar) {
  std::error_code ec;
  if (csv_path.has_parent_path()) std::filesystem::create_directories(csv_path.parent_path(), ec);
  std::ofstream csv(csv_path, std::ios::binary);
  if (!csv) fail(ErrorKind::kIo, "cannot write " + csv_path.string());
  write_grid_csv(csv, grid);
  std::ofstream js(sidecar_path(csv_path), std::ios::binary);
  if (!js) fail(ErrorKind::kIo, "cannot write " + sidecar_path(csv_path).string());
  js << sidecar.dump(2) << '\n';
}

GridFile load_grid(const std::filesystem::path& csv_path) {
  std::ifstream csv(csv_path, std::ios::binary);
  if (!csv) fail(ErrorKind::kIo, "cannot read " + csv_path.string());
  GridFile file{read_grid_csv(csv), nlohmann::json::object()};
  const auto meta = sidecar_path(csv_path);
  if (std::filesystem::exists(meta)) {
    std::ifstream js(meta, std::ios::binary);
    try {
      file.sidecar = nlohmann::json::parse(js);
    } catch (const nlohmann::json::exception& e) {
      fail(ErrorKind::kInvalidInput, "grid sidecar " + meta.string() + ": " + e.what());
    }
    if (file.sidecar.contains("bins") && file.sidecar["bins"] != file.grid.bins) {
      fail(ErrorKind::kInvalidInput, "grid sidecar " + meta.string() + ": bins disagree with the CSV");
    }
  }
  return file;
}

}  // namespace copula::grid_io
