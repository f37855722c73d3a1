#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "copula/errors.hpp"
#include "copula/sampling.hpp"
#include "doctest.h"

using namespace copula;
using namespace copula::sampling;

namespace {

struct Moments {
  double mean = 0.0;
  double var = 0.0;
  double skew = 0.0;
  double kurt = 0.0;
};

Moments moments(const std::vector<double>& x) {
  const double n = static_cast<double>(x.size());
  Moments m;
  for (double v : x) m.mean += v;
  m.mean /= n;
  double m2 = 0.0;
  double m3 = 0.0;
  double m4 = 0.0;
  for (double v : x) {
    const double d = v - m.mean;
    m2 += d * d;
    m3 += d * d * d;
    m4 += d * d * d * d;
  }
  m2 /= n;
  m3 /= n;
  m4 /= n;
  m.var = m2;
  m.skew = m3 / std::pow(m2, 1.5);
  m.kurt = m4 / (m2 * m2);
  return m;
}

double correlation(const PairSample& s) {
  const double n = static_cast<double>(s.x.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    mx += s.x[i];
    my += s.y[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < s.x.size(); ++i) {
    sxy += (s.x[i] - mx) * (s.y[i] - my);
    sxx += (s.x[i] - mx) * (s.x[i] - mx);
    syy += (s.y[i] - my) * (s.y[i] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

double mean_abs(const std::vector<double>& x) {
  double s = 0.0;
  for (double v : x) s += std::abs(v);
  return s / static_cast<double>(x.size());
}

}  // namespace

TEST_CASE("gaussian sampler correlation") {
  Rng rng({11, 0});
  const auto indep = sample_bivariate_gaussian(0.0, 1000000, rng);
  CHECK(std::abs(correlation(indep)) < 0.004);
  const auto m = moments(indep.x);
  CHECK(std::abs(m.mean) < 0.004);
  CHECK(std::abs(m.var - 1.0) < 0.006);
  const auto strong = sample_bivariate_gaussian(0.8, 1000000, rng);
  const double r = correlation(strong);
  CHECK(r >= 0.796);
  CHECK(r <= 0.804);
  CHECK_THROWS_AS(sample_bivariate_gaussian(1.0, 10, rng), Error);
}

TEST_CASE("K sampler moments") {
  const double n = 5.0;
  const double s = 0.5 * n;
  const std::size_t t = 1000000;
  // E|x| = sqrt(2 / pi) sqrt(2 / N) Gamma(s + 1/2) / Gamma(s); Var(|x|) = 1 - E|x|^2.
  const double abs_mean = std::sqrt(2.0 / std::numbers::pi) * std::sqrt(2.0 / n) *
                          std::exp(std::lgamma(s + 0.5) - std::lgamma(s));
  const double abs_se = std::sqrt((1.0 - abs_mean * abs_mean) / static_cast<double>(t));
  for (auto method : {KMethod::kGammaMixture, KMethod::kWishart}) {
    Rng rng({12, static_cast<std::uint64_t>(method)});
    const auto k = sample_k_bivariate(0.3, n, t, rng, method);
    const auto m = moments(k.x);
    CHECK(std::abs(m.var - 1.0) < 0.01);
    CHECK(m.kurt > 3.0);
    CHECK(m.kurt == doctest::Approx(3.0 * (1.0 + 2.0 / n)).epsilon(0.08));
    CHECK(std::abs(mean_abs(k.x) - abs_mean) < 4.0 * abs_se);
    CHECK(std::abs(correlation(k) - 0.3) < 0.01);
  }
}

TEST_CASE("K sampler approaches the gaussian for large N") {
  Rng rng({13, 0});
  const auto k = sample_k_bivariate(0.5, 1e4, 400000, rng);
  const auto m = moments(k.x);
  CHECK(std::abs(m.kurt - 3.0) < 0.05);
  CHECK(std::abs(correlation(k) - 0.5) < 0.01);
}

TEST_CASE("wishart sampler needs an integer N") {
  Rng rng({14, 0});
  CHECK_THROWS_AS(sample_k_bivariate(0.2, 4.5, 10, rng, KMethod::kWishart), Error);
  CHECK_NOTHROW(sample_k_bivariate(0.2, 4.5, 10, rng, KMethod::kGammaMixture));
  CHECK_THROWS_AS(sample_k_bivariate(0.2, 0.0, 10, rng), Error);
  const auto f = draw_wishart_factor(0.2, 3, rng);
  CHECK(f.n == 3);
  CHECK(f.row0.size() == 3);
  CHECK(f.row1.size() == 3);
}

TEST_CASE("skewed t sampler") {
  {
    Rng rng({15, 0});
    const auto s = sample_skewed_t_bivariate(0.4, 10.0, 0.0, 2000000, rng);
    CHECK(std::abs(moments(s.x).skew) < 0.05);
  }
  {
    Rng rng({15, 1});
    const double nu = 8.0;
    const double g = 0.06;
    const std::size_t t = 100000;
    const auto s = sample_skewed_t_bivariate(0.4, nu, g, t, rng);
    const auto m = moments(s.x);
    const double se = std::sqrt(m.var / static_cast<double>(t));
    CHECK(m.mean > 3.0 * se);
    CHECK(std::abs(m.mean - g * nu / (nu - 2.0)) < 4.0 * se);
    CHECK(std::abs(correlation(s) - 0.4) < 0.02);
  }
  Rng rng({15, 2});
  CHECK_THROWS_AS(sample_skewed_t_bivariate(0.4, 2.0, 0.0, 10, rng), Error);
}

TEST_CASE("inverse gamma mixing variable") {
  Rng rng({16, 0});
  const double nu = 8.0;
  const std::size_t t = 400000;
  const auto w = sample_inverse_gamma_mixing(nu, t, rng);
  const auto m = moments(w);
  const double var = 2.0 * nu * nu / ((nu - 2.0) * (nu - 2.0) * (nu - 4.0));
  CHECK(std::abs(m.mean - nu / (nu - 2.0)) < 4.0 * std::sqrt(var / static_cast<double>(t)));
  CHECK(std::count_if(w.begin(), w.end(), [](double v) { return !(v > 0.0); }) == 0);
}

TEST_CASE("streams are deterministic and independent") {
  Rng a({17, 3});
  Rng b({17, 3});
  const auto sa = sample_skewed_t_bivariate(0.4, 3.3, 0.06, 1000, a);
  const auto sb = sample_skewed_t_bivariate(0.4, 3.3, 0.06, 1000, b);
  CHECK(sa.x == sb.x);
  CHECK(sa.y == sb.y);

  Rng c({17, 4});
  const auto sc = sample_skewed_t_bivariate(0.4, 3.3, 0.06, 1000, c);
  CHECK(sa.x != sc.x);

  Rng base({17, 0});
  Rng split = base.split(4);
  CHECK(split.spec().stream == 4);
  const auto ss = sample_skewed_t_bivariate(0.4, 3.3, 0.06, 1000, split);
  CHECK(ss.x == sc.x);

  Rng g1({18, 0});
  Rng g2({18, 1});
  const auto x1 = sample_bivariate_gaussian(0.0, 20000, g1);
  const auto x2 = sample_bivariate_gaussian(0.0, 20000, g2);
  PairSample cross{x1.x, x2.x};
  CHECK(std::abs(correlation(cross)) < 4.0 / std::sqrt(20000.0));
}
