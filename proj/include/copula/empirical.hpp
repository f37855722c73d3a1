#pragma once

// Rank transform, empirical copula histograms and tail-dependence asymmetry.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "copula/grid.hpp"
#include "copula/market_data.hpp"

namespace copula::empirical {

// u(t) = #{tau : r(tau) <= r(t)} / T - 1 / (2T). Ties share a value.
std::vector<double> to_uniform(std::span<const double> r);

struct CopulaHistogram {
  DensityGrid density;
  std::int64_t sample_count = 0;  // observations per pair
  std::int64_t pair_count = 0;
};

// Bin of u among B bins: [k/B, (k+1)/B), last edge closed.
int bin_index(double u, int bins);

// Raw cell counts; row = u-bin.
struct PairCounts {
  int bins = 0;
  std::vector<std::int64_t> counts;
  std::int64_t samples = 0;
};

PairCounts pair_counts(std::span<const double> u, std::span<const double> v, int bins);

CopulaHistogram pairwise_copula(std::span<const double> u, std::span<const double> v,
                                int bins = 20);

// Mean of the pairwise histograms over all unordered column pairs. Counts are
// accumulated as integers, so the result does not depend on pair order.
CopulaHistogram averaged_copula(const market_data::ReturnMatrix& matrix, int bins = 20);

struct CornerMass {
  double lower_lower = 0.0;  // u < 0.2, v < 0.2
  double lower_upper = 0.0;  // u < 0.2, v > 0.8
  double upper_lower = 0.0;  // u > 0.8, v < 0.2
  double upper_upper = 0.0;  // u > 0.8, v > 0.8
};

struct TailAsymmetry {
  double p = 0.0;  // upper_upper - lower_lower
  double q = 0.0;  // lower_upper - upper_lower
  CornerMass corner_mass;
};

// B must be divisible by 5. Corner sums are taken over sorted cell values, so
// grids that agree up to a transpose or a half turn give identical masses.
TailAsymmetry tail_asymmetry(const DensityGrid& grid);

// Histogram over centered bins [(k - 1/2) w, (k + 1/2) w) with centers k w.
struct ValueHistogram {
  double bin_width = 0.0;
  std::vector<double> centers;
  std::vector<double> weights;  // relative frequencies, sum 1
  std::vector<std::int64_t> counts;
};

ValueHistogram value_histogram(std::span<const double> values, double bin_width);

struct PairAsymmetry {
  int k = 0;
  int l = 0;
  TailAsymmetry asymmetry;
};

struct AsymmetryHistograms {
  std::vector<PairAsymmetry> pairs;
  ValueHistogram p;
  ValueHistogram q;
};

AsymmetryHistograms asymmetry_histograms(const market_data::ReturnMatrix& matrix, int bins = 20,
                                         double bin_width = 0.01);

ValueHistogram correlation_histogram(const market_data::CorrelationSet& corrs,
                                     double bin_width = 0.02);

}  // namespace copula::empirical
