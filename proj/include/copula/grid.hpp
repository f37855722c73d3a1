#pragma once

// B x B density on the unit square. Row i is the u-bin, column j the v-bin;
// both 0-based here.

#include <vector>

namespace copula {

struct DensityGrid {
  int bins = 0;
  std::vector<double> cells;  // row-major

  DensityGrid() = default;
  explicit DensityGrid(int b);

  double& operator()(int i, int j) { return cells[static_cast<std::size_t>(i) * bins + j]; }
  double operator()(int i, int j) const { return cells[static_cast<std::size_t>(i) * bins + j]; }

  double cell_area() const { return 1.0 / (static_cast<double>(bins) * bins); }
  // Sum of density * cell area.
  double total_mass() const;
  double row_mass(int i) const;
  double column_mass(int j) const;
  DensityGrid transposed() const;
};

// Center (j + 1/2) / B of bin j (0-based), rounded to a multiple of 2^-53 so
// that center(B-1-j) = 1 - center(j) holds exactly.
double bin_center(int j, int bins);

}  // namespace copula
