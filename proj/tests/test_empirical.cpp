#include <algorithm>
#include <cmath>
#include <random>
#include <vector>

#include "copula/empirical.hpp"
#include "copula/errors.hpp"
#include "doctest.h"

using namespace copula;
using namespace copula::empirical;

namespace {

std::vector<double> uniforms(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> ud;
  std::vector<double> v(n);
  for (auto& x : v) x = ud(gen);
  return v;
}

DensityGrid transpose(const DensityGrid& g) { return g.transposed(); }

}  // namespace

TEST_CASE("to_uniform") {
  const auto u = to_uniform(std::vector<double>{3.0, 1.0, 2.0, 4.0});
  CHECK(u == std::vector<double>{0.625, 0.125, 0.375, 0.875});

  const auto t = to_uniform(std::vector<double>{1.0, 1.0, 2.0});
  CHECK(t[0] == t[1]);
  CHECK(t[0] == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(t[2] == doctest::Approx(5.0 / 6.0).epsilon(1e-15));

  for (std::size_t n : {1u, 2u, 7u, 100u}) {
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = std::exp(0.1 * static_cast<double>(i));
    const auto v = to_uniform(r);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(std::abs(v[i] - (static_cast<double>(i) + 0.5) / static_cast<double>(n)) <= 1e-12);
      CHECK(v[i] > 0.0);
      CHECK(v[i] < 1.0);
    }
  }
  CHECK_THROWS_AS(to_uniform(std::vector<double>{}), Error);
}

TEST_CASE("to_uniform is rank invariant") {
  const auto r = uniforms(500, 3);
  std::vector<double> g(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) g[i] = std::exp(5.0 * r[i]) - 2.0;
  CHECK(to_uniform(r) == to_uniform(g));
}

TEST_CASE("pairwise_copula fixtures") {
  const std::vector<double> u{0.1, 0.3, 0.6, 0.9};
  const auto co = pairwise_copula(u, u, 2);
  CHECK(co.density(0, 0) == 2.0);
  CHECK(co.density(1, 1) == 2.0);
  CHECK(co.density(0, 1) == 0.0);
  CHECK(co.density(1, 0) == 0.0);
  CHECK(co.pair_count == 1);
  CHECK(co.sample_count == 4);

  std::vector<double> anti(u.size());
  for (std::size_t i = 0; i < u.size(); ++i) anti[i] = 1.0 - u[i];
  const auto am = pairwise_copula(u, anti, 2);
  CHECK(am.density(0, 1) == 2.0);
  CHECK(am.density(1, 0) == 2.0);
  CHECK(am.density(0, 0) == 0.0);

  CHECK_THROWS_AS(pairwise_copula(u, std::vector<double>{0.5}, 2), Error);
  CHECK_THROWS_AS(pairwise_copula(u, u, 1), Error);
  CHECK_THROWS_AS(pairwise_copula(std::vector<double>{1.5}, std::vector<double>{0.5}, 2), Error);
}

TEST_CASE("bin membership") {
  CHECK(bin_index(0.0, 20) == 0);
  CHECK(bin_index(0.05, 20) == 1);
  CHECK(bin_index(0.0499999, 20) == 0);
  CHECK(bin_index(1.0, 20) == 19);
}

TEST_CASE("independent uniforms give a flat histogram") {
  const auto u = uniforms(1000000, 21);
  const auto v = uniforms(1000000, 22);
  const auto h = pairwise_copula(to_uniform(u), to_uniform(v), 20);
  // Each cell holds ~2500 points, so its density has sd 0.02; the largest of
  // 400 deviations sits near 3 sd.
  const double sd = std::sqrt(400.0 / 1e6);
  double worst = 0.0;
  double chi2 = 0.0;
  for (double c : h.density.cells) {
    worst = std::max(worst, std::abs(c - 1.0));
    chi2 += (c - 1.0) * (c - 1.0) / (sd * sd);
  }
  CHECK(worst < 4.5 * sd);
  // 361 degrees of freedom for a table with fixed margins.
  CHECK(std::abs(chi2 - 361.0) < 5.0 * std::sqrt(2.0 * 361.0));
}

TEST_CASE("marginal uniformity, normalization and transpose symmetry") {
  const std::size_t n = 2000;  // multiple of B
  const auto a = uniforms(n, 5);
  auto b = uniforms(n, 6);
  for (std::size_t i = 0; i < n; ++i) b[i] = 0.6 * a[i] + 0.4 * b[i];
  const auto u = to_uniform(a);
  const auto v = to_uniform(b);
  const auto h = pairwise_copula(u, v, 20);
  const double area = h.density.cell_area();
  for (int i = 0; i < 20; ++i) {
    double row = 0.0;
    double col = 0.0;
    for (int j = 0; j < 20; ++j) {
      row += h.density(i, j) * area;
      col += h.density(j, i) * area;
    }
    CHECK(std::abs(row - 0.05) <= 1e-9);
    CHECK(std::abs(col - 0.05) <= 1e-9);
  }
  CHECK(std::abs(h.density.total_mass() - 1.0) <= 1e-9);
  for (double c : h.density.cells) CHECK(c >= 0.0);

  const auto ht = pairwise_copula(v, u, 20);
  CHECK(ht.density.cells == transpose(h.density).cells);
}

TEST_CASE("averaged_copula") {
  market_data::ReturnMatrix m;
  m.tickers = {"A", "B"};
  m.columns = {uniforms(400, 1), uniforms(400, 2)};
  const auto avg = averaged_copula(m, 20);
  const auto single = pairwise_copula(to_uniform(m.columns[0]), to_uniform(m.columns[1]), 20);
  CHECK(avg.density.cells == single.density.cells);
  CHECK(avg.pair_count == 1);

  m.tickers = {"A", "B", "C", "D"};
  m.columns = {uniforms(300000, 1), uniforms(300000, 2), uniforms(300000, 3), uniforms(300000, 4)};
  const auto flat = averaged_copula(m, 20);
  CHECK(flat.pair_count == 6);
  CHECK(std::abs(flat.density.total_mass() - 1.0) <= 1e-9);
  double worst = 0.0;
  for (double c : flat.density.cells) worst = std::max(worst, std::abs(c - 1.0));
  CHECK(worst < 0.05);

  const auto col = uniforms(500, 9);
  m.columns = {col, col, col};
  m.tickers = {"A", "B", "C"};
  const auto diag = averaged_copula(m, 20);
  const auto one = pairwise_copula(to_uniform(col), to_uniform(col), 20);
  CHECK(diag.density.cells == one.density.cells);

  m.columns[1].assign(500, 1.0);
  CHECK_THROWS_AS(averaged_copula(m, 20), Error);
}

TEST_CASE("tail_asymmetry fixtures") {
  std::vector<double> u(1000);
  for (std::size_t i = 0; i < u.size(); ++i) u[i] = (static_cast<double>(i) + 0.5) / 1000.0;
  const auto co = pairwise_copula(u, u, 20);
  const auto ta = tail_asymmetry(co.density);
  CHECK(ta.corner_mass.lower_lower == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(ta.corner_mass.upper_upper == doctest::Approx(0.2).epsilon(1e-14));
  CHECK(ta.corner_mass.lower_upper == 0.0);
  CHECK(ta.corner_mass.upper_lower == 0.0);
  CHECK(ta.p == 0.0);
  CHECK(ta.q == 0.0);
  CHECK(ta.p == ta.corner_mass.upper_upper - ta.corner_mass.lower_lower);
  CHECK(ta.q == ta.corner_mass.lower_upper - ta.corner_mass.upper_lower);

  DensityGrid g(10);
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) g(i, j) = 0.3 + 0.01 * i + 0.07 * j;
  }
  CHECK_THROWS_AS(tail_asymmetry(DensityGrid(7)), Error);
  const auto ga = tail_asymmetry(g);
  CHECK(ga.p == ga.corner_mass.upper_upper - ga.corner_mass.lower_lower);
  CHECK(ga.q == ga.corner_mass.lower_upper - ga.corner_mass.upper_lower);
  CHECK(ga.q > 0.0);
}

TEST_CASE("tail_asymmetry of symmetric histograms is exactly zero") {
  std::mt19937_64 gen(77);
  std::uniform_real_distribution<double> ud(0.0, 3.0);
  for (int trial = 0; trial < 20; ++trial) {
    const int b = 5 * (1 + trial % 6);
    DensityGrid point(b);
    DensityGrid trans(b);
    for (int i = 0; i < b; ++i) {
      for (int j = 0; j < b; ++j) {
        if (i * b + j < (b - 1 - i) * b + (b - 1 - j)) {
          point(i, j) = point(b - 1 - i, b - 1 - j) = ud(gen);
        } else if (i == b - 1 - i && j == b - 1 - j) {
          point(i, j) = ud(gen);
        }
        if (j >= i) trans(i, j) = trans(j, i) = ud(gen);
      }
    }
    CHECK(tail_asymmetry(point).p == 0.0);
    CHECK(tail_asymmetry(trans).q == 0.0);
  }
}

TEST_CASE("value and correlation histograms") {
  const auto h = value_histogram(std::vector<double>{0.40, 0.40, 0.60}, 0.02);
  REQUIRE(h.centers.size() == 2);
  CHECK(h.centers[0] == doctest::Approx(0.40));
  CHECK(h.centers[1] == doctest::Approx(0.60));
  CHECK(h.weights[0] == doctest::Approx(2.0 / 3.0));
  CHECK(h.weights[1] == doctest::Approx(1.0 / 3.0));

  market_data::CorrelationSet cs;
  cs.pairs = {{0, 1, 0.37}};
  cs.mean_correlation = 0.37;
  const auto one = correlation_histogram(cs, 0.02);
  REQUIRE(one.weights.size() == 1);
  CHECK(one.weights[0] == 1.0);
  CHECK(std::abs(one.centers[0] - 0.37) <= 0.01 + 1e-12);

  const auto many = value_histogram(uniforms(200000, 4), 0.02);
  double total = 0.0;
  for (double w : many.weights) total += w;
  CHECK(std::abs(total - 1.0) <= 1e-12);
  // Interior bins of a uniform sample on [0, 1) hold 2% each.
  for (std::size_t k = 1; k + 1 < many.weights.size(); ++k) CHECK(std::abs(many.weights[k] - 0.02) < 0.002);

  market_data::CorrelationSet empty;
  CHECK_THROWS_AS(correlation_histogram(empty, 0.02), Error);
  CHECK_THROWS_AS(value_histogram(std::vector<double>{1.0}, 0.0), Error);
}

TEST_CASE("asymmetry_histograms") {
  market_data::ReturnMatrix m;
  m.tickers = {"A", "B"};
  m.columns = {uniforms(1000, 1), uniforms(1000, 2)};
  const auto two = asymmetry_histograms(m, 20);
  CHECK(two.pairs.size() == 1);
  CHECK(two.p.counts.size() == 1);
  CHECK(two.q.counts.size() == 1);

  const auto col = uniforms(1000, 3);
  m.tickers = {"A", "B", "C"};
  m.columns = {col, col, col};
  const auto same = asymmetry_histograms(m, 20);
  CHECK(same.pairs.size() == 3);
  for (const auto& pa : same.pairs) {
    CHECK(pa.asymmetry.p == 0.0);
    CHECK(pa.asymmetry.q == 0.0);
  }

  // Gaussian columns with common correlation 0.4.
  std::mt19937_64 gen(99);
  std::normal_distribution<double> nd;
  const std::size_t n = 20000;
  const int k_cols = 6;
  std::vector<std::vector<double>> cols(k_cols, std::vector<double>(n));
  for (std::size_t t = 0; t < n; ++t) {
    const double common = nd(gen);
    for (int k = 0; k < k_cols; ++k) cols[k][t] = std::sqrt(0.4) * common + std::sqrt(0.6) * nd(gen);
  }
  m.tickers = {"A", "B", "C", "D", "E", "F"};
  m.columns = cols;
  const auto gauss = asymmetry_histograms(m, 20);
  double mp = 0.0;
  double mq = 0.0;
  for (const auto& pa : gauss.pairs) {
    mp += pa.asymmetry.p;
    mq += pa.asymmetry.q;
  }
  mp /= static_cast<double>(gauss.pairs.size());
  mq /= static_cast<double>(gauss.pairs.size());
  // A corner holds ~0.08 of the mass; the difference of two has sd ~ sqrt(2 * 0.08 / n).
  const double se = std::sqrt(2.0 * 0.08 / static_cast<double>(n));
  CHECK(std::abs(mp) < 4.0 * se);
  CHECK(std::abs(mq) < 4.0 * se);
}
