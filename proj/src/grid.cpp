#include "copula/grid.hpp"

#include <cmath>
#include <string>

#include "copula/errors.hpp"

namespace copula {

DensityGrid::DensityGrid(int b) : bins(b) {
  if (b < 1) fail(ErrorKind::kParameter, "grid: bins must be positive, got " + std::to_string(b));
  cells.assign(static_cast<std::size_t>(b) * b, 0.0);
}

double DensityGrid::total_mass() const {
  double sum = 0.0;
  for (int i = 0; i < bins; ++i) sum += row_mass(i);
  return sum;
}

double DensityGrid::row_mass(int i) const {
  double sum = 0.0;
  for (int j = 0; j < bins; ++j) sum += (*this)(i, j);
  return sum * cell_area();
}

double DensityGrid::column_mass(int j) const {
  double sum = 0.0;
  for (int i = 0; i < bins; ++i) sum += (*this)(i, j);
  return sum * cell_area();
}

DensityGrid DensityGrid::transposed() const {
  DensityGrid t(bins);
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

double bin_center(int j, int bins) {
  if (j < 0 || j >= bins) fail(ErrorKind::kParameter, "bin_center: index out of range");
  const int mirror = bins - 1 - j;
  // Lower centers sit on multiples of 2^-53, so 1 - center is exact both ways.
  const auto lower = [bins](int k) {
    return std::ldexp(std::nearbyint(std::ldexp((2.0 * k + 1.0) / (2.0 * bins), 53)), -53);
  };
  if (j <= mirror) return lower(j);
  return 1.0 - lower(mirror);
}

}  // namespace copula
