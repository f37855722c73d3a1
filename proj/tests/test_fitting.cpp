#include <algorithm>
#include <cmath>
#include <variant>

#include "copula/analytic.hpp"
#include "copula/empirical.hpp"
#include "copula/errors.hpp"
#include "copula/fitting.hpp"
#include "copula/market_data.hpp"
#include "copula/sampling.hpp"
#include "doctest.h"

using namespace copula;
using namespace copula::fitting;

namespace {

market_data::ReturnMatrix pair_matrix(const sampling::PairSample& s) {
  market_data::ReturnMatrix m;
  m.tickers = {"A", "B"};
  m.columns = {s.x, s.y};
  return m;
}

double min_curve_loss(const FitResult& fit) {
  double best = INFINITY;
  for (const auto& p : fit.loss_curve) best = std::min(best, p.loss);
  return best;
}

const ComparisonRow& row_named(const std::vector<ComparisonRow>& rows, const std::string& name) {
  for (const auto& r : rows) {
    if (r.name == name) return r;
  }
  FAIL("missing row " << name);
  return rows.front();
}

}  // namespace

TEST_CASE("lms loss") {
  DensityGrid a(4);
  for (double& c : a.cells) c = 1.0;
  DensityGrid b = a;
  CHECK(lms_loss(a, b) == 0.0);
  b(1, 2) += 0.3;
  CHECK(lms_loss(a, b) == doctest::Approx(0.09).epsilon(1e-15));
  CHECK(lms_loss(b, a) == lms_loss(a, b));
  CHECK(lms_loss(a, b, LossConvention::kMean) == doctest::Approx(0.09 / 16.0).epsilon(1e-15));
  DensityGrid c = b;
  c(3, 0) -= 0.5;
  CHECK(lms_loss(a, c) == doctest::Approx(lms_loss(a, b) + 0.25).epsilon(1e-15));
  CHECK_THROWS_AS(lms_loss(a, DensityGrid(5)), Error);
}

TEST_CASE("K fit recovers the generating grid") {
  const auto target = analytic::evaluate_grid(analytic::KModel{0.4, 5.0}, 20, analytic::GridEvaluation::kCellAverage);
  const auto fit = fit_k_copula(target.density, 0.4);
  const auto& k = std::get<analytic::KModel>(fit.model);
  CHECK(k.n == doctest::Approx(5.0).epsilon(1e-4));
  CHECK(fit.loss < 1e-12);
  CHECK(fit.converged);
  CHECK(fit.loss <= min_curve_loss(fit));
  CHECK(fit.evaluations == static_cast<int>(fit.loss_curve.size()));
}

TEST_CASE("skewed t fit recovers the generating grid") {
  const auto target =
      analytic::evaluate_grid(analytic::SkewedTModel{0.44, 3.3, 0.06}, 20, analytic::GridEvaluation::kCellAverage);
  const auto fit = fit_skewed_t(target.density, 0.44);
  const auto& st = std::get<analytic::SkewedTModel>(fit.model);
  CHECK(st.nu == doctest::Approx(3.3).epsilon(1e-3));
  CHECK(std::abs(st.gamma - 0.06) < 1e-3);
  CHECK(fit.loss < 1e-12);
  CHECK(fit.loss <= min_curve_loss(fit));
}

TEST_CASE("fit options are validated") {
  DensityGrid flat(10);
  for (double& c : flat.cells) c = 1.0;
  KFitOptions bad;
  bad.n_lo = 5.0;
  bad.n_hi = 2.0;
  CHECK_THROWS_AS(fit_k_copula(flat, 0.2, bad), Error);
  CHECK_THROWS_AS(fit_k_copula(flat, 1.0), Error);
  SkewedTFitOptions bad_t;
  bad_t.nu_lo = 1.5;
  CHECK_THROWS_AS(fit_skewed_t(flat, 0.2, bad_t), Error);
}

TEST_CASE("comparison on K data prefers K") {
  sampling::Rng rng({21, 0});
  const auto m = pair_matrix(sampling::sample_k_bivariate(0.4, 4.0, 200000, rng));
  const auto emp = empirical::averaged_copula(m, 20);
  const auto corrs = market_data::correlation_set(m);
  ComparisonOptions options;
  options.models = {"gaussian", "cwg", "k"};
  const auto rows = model_comparison(emp, corrs, options);
  REQUIRE(rows.size() == 3);
  const auto& g = row_named(rows, "gaussian");
  const auto& k = row_named(rows, "k");
  CHECK(k.loss_sum < g.loss_sum);
  CHECK(k.fit.has_value());
  CHECK(std::get<analytic::KModel>(k.model).n == doctest::Approx(4.0).epsilon(0.1));
  for (const auto& r : rows) {
    CHECK(r.loss_mean == doctest::Approx(r.loss_sum / 400.0).epsilon(1e-12));
    CHECK(r.difference.bins == 20);
  }
  // A single pair gives a single-entry mixture at its histogram bin centre.
  const auto& cwg = std::get<analytic::CwgModel>(row_named(rows, "cwg").model);
  REQUIRE(cwg.entries.size() == 1);
  CHECK(cwg.entries[0].weight == 1.0);
  CHECK(std::abs(cwg.entries[0].c - std::get<analytic::GaussianModel>(g.model).c) <= 0.01 + 1e-12);
}

TEST_CASE("comparison on gaussian data") {
  sampling::Rng rng({22, 0});
  const std::size_t t = 200000;
  const auto m = pair_matrix(sampling::sample_bivariate_gaussian(0.5, t, rng));
  const auto emp = empirical::averaged_copula(m, 20);
  const auto corrs = market_data::correlation_set(m);
  ComparisonOptions options;
  options.models = {"gaussian", "k"};
  const auto rows = model_comparison(emp, corrs, options);
  const auto& g = row_named(rows, "gaussian");
  const auto& k = row_named(rows, "k");
  // Pure counting noise: sum over cells of B^2 c_ij / T, about B^4 / T.
  const double noise = 20.0 * 20.0 * 20.0 * 20.0 / static_cast<double>(t);
  CHECK(g.loss_sum < 2.0 * noise);
  CHECK(g.loss_sum <= k.loss_sum + 0.5 * noise);
}

TEST_CASE("comparison edge cases") {
  sampling::Rng rng({23, 0});
  auto s = sampling::sample_bivariate_gaussian(0.0, 2000, rng);
  s.y = s.x;
  const auto m = pair_matrix(s);
  const auto emp = empirical::averaged_copula(m, 10);
  const auto corrs = market_data::correlation_set(m);
  ComparisonOptions options;
  options.models = {"gaussian", "cwg"};
  const auto rows = model_comparison(emp, corrs, options);
  for (const auto& r : rows) CHECK(std::isfinite(r.loss_sum));
  CHECK(std::get<analytic::GaussianModel>(rows[0].model).c == kMaxCorrelation);

  options.models = {};
  CHECK_THROWS_AS(model_comparison(emp, corrs, options), Error);
  options.models = {"clayton"};
  CHECK_THROWS_AS(model_comparison(emp, corrs, options), Error);
  CHECK_THROWS_AS(model_comparison(emp, market_data::CorrelationSet{}, ComparisonOptions{}), Error);
}
