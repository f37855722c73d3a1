#include "copula/empirical.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <string>

#include "copula/errors.hpp"

namespace copula::empirical {
namespace {

void check_bins(int bins) {
  if (bins < 2) fail(ErrorKind::kParameter, "copula histogram: bins must be >= 2");
}

DensityGrid density_from_counts(const std::vector<std::int64_t>& counts, int bins,
                                std::int64_t samples, std::int64_t pairs) {
  DensityGrid grid(bins);
  const double scale = static_cast<double>(bins) * bins;
  const double denom = static_cast<double>(pairs) * static_cast<double>(samples);
  for (std::size_t c = 0; c < counts.size(); ++c) {
    grid.cells[c] = static_cast<double>(counts[c]) * scale / denom;
  }
  return grid;
}

double sorted_sum(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum;
}

}  // namespace

std::vector<double> to_uniform(std::span<const double> r) {
  if (r.empty()) fail(ErrorKind::kInsufficientData, "to_uniform: empty input");
  for (double x : r) {
    if (std::isnan(x)) fail(ErrorKind::kInvalidInput, "to_uniform: NaN in input");
  }
  std::vector<double> sorted(r.begin(), r.end());
  std::sort(sorted.begin(), sorted.end());
  const double two_t = 2.0 * static_cast<double>(r.size());
  std::vector<double> u(r.size());
  for (std::size_t t = 0; t < r.size(); ++t) {
    const auto count = std::upper_bound(sorted.begin(), sorted.end(), r[t]) - sorted.begin();
    u[t] = (2.0 * static_cast<double>(count) - 1.0) / two_t;
  }
  return u;
}

int bin_index(double u, int bins) {
  if (!(u >= 0.0 && u <= 1.0)) {
    fail(ErrorKind::kInvalidInput, "copula histogram: value outside [0, 1]: " + std::to_string(u));
  }
  const int k = static_cast<int>(std::floor(u * bins));
  return std::min(k, bins - 1);
}

PairCounts pair_counts(std::span<const double> u, std::span<const double> v, int bins) {
  check_bins(bins);
  if (u.size() != v.size()) {
    fail(ErrorKind::kParameter, "pairwise copula: u and v differ in length (" +
                                    std::to_string(u.size()) + " vs " + std::to_string(v.size()) +
                                    ")");
  }
  if (u.empty()) fail(ErrorKind::kInsufficientData, "pairwise copula: no samples");
  PairCounts pc{bins, std::vector<std::int64_t>(static_cast<std::size_t>(bins) * bins, 0),
                static_cast<std::int64_t>(u.size())};
  for (std::size_t t = 0; t < u.size(); ++t) {
    ++pc.counts[static_cast<std::size_t>(bin_index(u[t], bins)) * bins + bin_index(v[t], bins)];
  }
  return pc;
}

CopulaHistogram pairwise_copula(std::span<const double> u, std::span<const double> v, int bins) {
  const PairCounts pc = pair_counts(u, v, bins);
  return {density_from_counts(pc.counts, bins, pc.samples, 1), pc.samples, 1};
}

CopulaHistogram averaged_copula(const market_data::ReturnMatrix& matrix, int bins) {
  check_bins(bins);
  matrix.validate();
  const std::size_t k_cols = matrix.cols();
  if (k_cols < 2) fail(ErrorKind::kInsufficientData, "averaged copula: need at least 2 columns");
  const std::size_t n = matrix.rows();
  if (n == 0) fail(ErrorKind::kInsufficientData, "averaged copula: no rows");
  std::vector<std::vector<int>> bin_of(k_cols);
  for (std::size_t k = 0; k < k_cols; ++k) {
    const auto& col = matrix.columns[k];
    if (std::all_of(col.begin(), col.end(), [&](double x) { return x == col.front(); })) {
      fail(ErrorKind::kDegenerateSeries,
           "averaged copula: column '" + matrix.tickers[k] + "' is constant");
    }
    const auto u = to_uniform(col);
    bin_of[k].resize(n);
    for (std::size_t t = 0; t < n; ++t) bin_of[k][t] = bin_index(u[t], bins);
  }
  std::vector<std::int64_t> counts(static_cast<std::size_t>(bins) * bins, 0);
  std::int64_t pairs = 0;
  for (std::size_t k = 0; k < k_cols; ++k) {
    for (std::size_t l = k + 1; l < k_cols; ++l) {
      for (std::size_t t = 0; t < n; ++t) {
        ++counts[static_cast<std::size_t>(bin_of[k][t]) * bins + bin_of[l][t]];
      }
      ++pairs;
    }
  }
  const auto samples = static_cast<std::int64_t>(n);
  return {density_from_counts(counts, bins, samples, pairs), samples, pairs};
}

TailAsymmetry tail_asymmetry(const DensityGrid& grid) {
  const int b = grid.bins;
  if (b < 5 || b % 5 != 0) {
    fail(ErrorKind::kParameter, "tail asymmetry: bins must be divisible by 5 so that 0.2 falls on a "
                                "bin edge, got " + std::to_string(b));
  }
  const int m = b / 5;
  const auto corner = [&](int row0, int col0) {
    std::vector<double> cells;
    cells.reserve(static_cast<std::size_t>(m) * m);
    for (int i = row0; i < row0 + m; ++i) {
      for (int j = col0; j < col0 + m; ++j) cells.push_back(grid(i, j));
    }
    return sorted_sum(std::move(cells)) * grid.cell_area();
  };
  TailAsymmetry ta;
  ta.corner_mass.lower_lower = corner(0, 0);
  ta.corner_mass.lower_upper = corner(0, b - m);
  ta.corner_mass.upper_lower = corner(b - m, 0);
  ta.corner_mass.upper_upper = corner(b - m, b - m);
  ta.p = ta.corner_mass.upper_upper - ta.corner_mass.lower_lower;
  ta.q = ta.corner_mass.lower_upper - ta.corner_mass.upper_lower;
  return ta;
}

ValueHistogram value_histogram(std::span<const double> values, double bin_width) {
  if (!(bin_width > 0.0) || !std::isfinite(bin_width)) {
    fail(ErrorKind::kParameter, "histogram: bin width must be positive");
  }
  if (values.empty()) fail(ErrorKind::kInsufficientData, "histogram: no values");
  std::map<long long, std::int64_t> counts;
  for (double x : values) {
    if (!std::isfinite(x)) fail(ErrorKind::kInvalidInput, "histogram: non-finite value");
    ++counts[static_cast<long long>(std::floor(x / bin_width + 0.5))];
  }
  ValueHistogram h;
  h.bin_width = bin_width;
  const double total = static_cast<double>(values.size());
  for (const auto& [k, n] : counts) {
    h.centers.push_back(static_cast<double>(k) * bin_width);
    h.counts.push_back(n);
    h.weights.push_back(static_cast<double>(n) / total);
  }
  return h;
}

AsymmetryHistograms asymmetry_histograms(const market_data::ReturnMatrix& matrix, int bins,
                                         double bin_width) {
  check_bins(bins);
  matrix.validate();
  const std::size_t k_cols = matrix.cols();
  if (k_cols < 2) fail(ErrorKind::kInsufficientData, "asymmetry: need at least 2 columns");
  std::vector<std::vector<double>> u(k_cols);
  for (std::size_t k = 0; k < k_cols; ++k) u[k] = to_uniform(matrix.columns[k]);
  AsymmetryHistograms out;
  std::vector<double> ps;
  std::vector<double> qs;
  for (std::size_t k = 0; k < k_cols; ++k) {
    for (std::size_t l = k + 1; l < k_cols; ++l) {
      const auto hist = pairwise_copula(u[k], u[l], bins);
      const auto ta = tail_asymmetry(hist.density);
      out.pairs.push_back({static_cast<int>(k), static_cast<int>(l), ta});
      ps.push_back(ta.p);
      qs.push_back(ta.q);
    }
  }
  out.p = value_histogram(ps, bin_width);
  out.q = value_histogram(qs, bin_width);
  return out;
}

ValueHistogram correlation_histogram(const market_data::CorrelationSet& corrs, double bin_width) {
  std::vector<double> cs;
  cs.reserve(corrs.pairs.size());
  for (const auto& p : corrs.pairs) cs.push_back(p.c);
  if (cs.empty()) fail(ErrorKind::kInsufficientData, "correlation histogram: empty correlation set");
  return value_histogram(cs, bin_width);
}

}  // namespace copula::empirical
