#include <cmath>
#include <functional>
#include <random>
#include <sstream>
#include <vector>

#include "copula/errors.hpp"
#include "copula/market_data.hpp"
#include "doctest.h"

using namespace copula;
using namespace copula::market_data;

namespace {

std::vector<double> normals(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> nd;
  std::vector<double> v(n);
  for (auto& x : v) x = nd(gen);
  return v;
}

double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double variance(const std::vector<double>& v) {
  const double m = mean(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return s / static_cast<double>(v.size());
}

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no exception");
  return ErrorKind::kIo;
}

}  // namespace

TEST_CASE("compute_returns") {
  const std::vector<double> p{100.0, 110.0, 99.0};
  const auto r = compute_returns(p);
  REQUIRE(r.size() == 2);
  CHECK(r[0] == doctest::Approx(0.10).epsilon(1e-15));
  CHECK(r[1] == doctest::Approx(-0.10).epsilon(1e-15));
  CHECK(compute_returns(std::vector<double>{5.0, 5.0, 5.0}) == std::vector<double>{0.0, 0.0});
  CHECK(kind_of([] { compute_returns(std::vector<double>{100.0}); }) == ErrorKind::kInsufficientData);
  CHECK(kind_of([] { compute_returns(std::vector<double>{100.0, 0.0}); }) == ErrorKind::kInvalidInput);
  CHECK(kind_of([] { compute_returns(std::vector<double>{100.0, -3.0}); }) == ErrorKind::kInvalidInput);
  for (std::size_t n = 2; n < 30; ++n) {
    std::vector<double> prices(n, 1.0);
    for (std::size_t i = 0; i < n; ++i) prices[i] = 1.0 + 0.1 * static_cast<double>(i % 7);
    CHECK(compute_returns(prices).size() == n - 1);
  }
}

TEST_CASE("local_normalize") {
  const std::vector<double> r{1.0, 2.0, 3.0};
  const auto rho = local_normalize(r, 3);
  REQUIRE(rho.size() == 1);
  CHECK(rho[0] == doctest::Approx(1.0 / std::sqrt(2.0 / 3.0)).epsilon(1e-14));
  CHECK(rho[0] == doctest::Approx(1.2247).epsilon(1e-4));

  try {
    local_normalize(std::vector<double>{0.5, 0.5, 0.5, 0.5}, 3);
    FAIL("expected DegenerateWindowError");
  } catch (const DegenerateWindowError& e) {
    CHECK(e.index() == 2);
  }
  CHECK(kind_of([&] { local_normalize(r, 1); }) == ErrorKind::kParameter);
  CHECK(kind_of([&] { local_normalize(r, 4); }) == ErrorKind::kInsufficientData);

  const auto strict = local_normalize(std::vector<double>{1.0, 2.0, 3.0, 10.0}, 3,
                                      WindowAlignment::kStrictlyPreceding);
  REQUIRE(strict.size() == 1);
  CHECK(strict[0] == doctest::Approx((10.0 - 2.0) / std::sqrt(2.0 / 3.0)).epsilon(1e-14));
  CHECK(kind_of([&] { local_normalize(r, 3, WindowAlignment::kStrictlyPreceding); }) ==
        ErrorKind::kInsufficientData);
}

TEST_CASE("local_normalize on iid normals") {
  const auto r = normals(5000, 11);
  const auto rho = local_normalize(r, 13);
  CHECK(rho.size() == 5000 - 13 + 1);
  CHECK(std::abs(mean(rho)) < 0.05);
  CHECK(std::abs(variance(rho) - 1.0) < 0.1);
}

TEST_CASE("local_normalize affine invariance") {
  const auto r = normals(400, 12);
  std::vector<double> t(r.size());
  for (std::size_t i = 0; i < r.size(); ++i) t[i] = 3.7 * r[i] - 1.25;
  for (auto align : {WindowAlignment::kIncludeCurrent, WindowAlignment::kStrictlyPreceding}) {
    const auto a = local_normalize(r, 13, align);
    const auto b = local_normalize(t, 13, align);
    REQUIRE(a.size() == b.size());
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) worst = std::max(worst, std::abs(a[i] - b[i]));
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("pearson_correlation") {
  const std::vector<double> a{1.0, 2.0, 3.0};
  const std::vector<double> b{3.0, 2.0, 1.0};
  CHECK(pearson_correlation(a, a) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(pearson_correlation(a, b) == doctest::Approx(-1.0).epsilon(1e-15));
  CHECK(pearson_correlation(std::vector<double>{1, 2, 3, 4}, std::vector<double>{1, 3, 2, 4}) ==
        doctest::Approx(0.8).epsilon(1e-14));
  CHECK(kind_of([&] { pearson_correlation(a, std::vector<double>{1.0, 1.0, 1.0}); }) ==
        ErrorKind::kDegenerateSeries);
  CHECK(kind_of([&] { pearson_correlation(a, std::vector<double>{1.0, 2.0}); }) == ErrorKind::kParameter);

  const auto x = normals(300, 1);
  auto y = normals(300, 2);
  for (std::size_t i = 0; i < y.size(); ++i) y[i] += 0.5 * x[i];
  const double c = pearson_correlation(x, y);
  CHECK(c == pearson_correlation(y, x));
  CHECK(std::abs(c) <= 1.0 + 1e-12);
  std::vector<double> xs(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) xs[i] = 25.0 * x[i] + 7.0;
  CHECK(std::abs(pearson_correlation(xs, y) - c) <= 1e-12);
}

TEST_CASE("correlation_set") {
  ReturnMatrix m;
  m.tickers = {"A", "B"};
  m.columns = {{1.0, 2.0, 4.0, 3.0}, {1.0, 2.0, 4.0, 3.0}};
  const auto cs = correlation_set(m);
  REQUIRE(cs.pairs.size() == 1);
  CHECK(cs.pairs[0].k == 0);
  CHECK(cs.pairs[0].l == 1);
  CHECK(cs.pairs[0].c == doctest::Approx(1.0));
  CHECK(cs.mean_correlation == doctest::Approx(1.0));

  ReturnMatrix ind;
  ind.tickers = {"A", "B", "C"};
  ind.columns = {normals(20000, 3), normals(20000, 4), normals(20000, 5)};
  const auto ci = correlation_set(ind);
  CHECK(ci.pairs.size() == 3);
  CHECK(std::abs(ci.mean_correlation) < 0.05);

  ReturnMatrix bad = m;
  bad.tickers = {"A", "FLAT"};
  bad.columns[1] = {2.0, 2.0, 2.0, 2.0};
  try {
    correlation_set(bad);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::kDegenerateSeries);
    CHECK(std::string(e.what()).find("FLAT") != std::string::npos);
  }
}

TEST_CASE("read_prices_csv wide and long agree") {
  std::istringstream wide(
      "date,BBB,AAA\n"
      "# comment\n"
      "2020-01-02,10,100\n"
      "2020-01-03,11,101\n"
      "\n"
      "2020-01-06,12,NA\n"
      "2020-01-07,13,103\n");
  std::istringstream lng(
      "date,ticker,adjusted_close\n"
      "2020-01-02,AAA,100\n"
      "2020-01-03,AAA,101\n"
      "2020-01-07,AAA,103\n"
      "2020-01-02,BBB,10\n"
      "2020-01-03,BBB,11\n"
      "2020-01-06,BBB,12\n"
      "2020-01-07,BBB,13\n");
  const auto a = read_prices_csv(wide);
  const auto b = read_prices_csv(lng);
  REQUIRE(a.size() == 2);
  REQUIRE(b.size() == 2);
  for (std::size_t k = 0; k < 2; ++k) {
    CHECK(a[k].ticker == b[k].ticker);
    CHECK(a[k].dates == b[k].dates);
    CHECK(a[k].prices == b[k].prices);
  }
  CHECK(a[0].ticker == "AAA");
  CHECK(a[0].prices.size() == 3);
}

TEST_CASE("read_prices_csv errors carry line numbers") {
  std::istringstream bad("date,A\n2020-01-02,1\n2020-01-03,abc\n");
  try {
    read_prices_csv(bad);
    FAIL("expected error");
  } catch (const Error& e) {
    CHECK(e.is_input_error());
    CHECK(std::string(e.what()).find("line 3") != std::string::npos);
  }
  std::istringstream unsorted("date,A\n2020-01-03,1\n2020-01-02,2\n");
  const auto sorted = read_prices_csv(unsorted);
  CHECK(sorted[0].dates == std::vector<std::string>{"2020-01-02", "2020-01-03"});
  CHECK(sorted[0].prices == std::vector<double>{2.0, 1.0});
  std::istringstream dup("date,A\n2020-01-02,1\n2020-01-02,2\n");
  CHECK_THROWS_AS(read_prices_csv(dup), Error);
  std::istringstream negative("date,A\n2020-01-02,1\n2020-01-03,-2\n");
  CHECK_THROWS_AS(read_prices_csv(negative), Error);
}

TEST_CASE("align_prices drops sparse tickers and inner-joins") {
  std::vector<PriceSeries> s(3);
  std::vector<std::string> all;
  for (int d = 0; d < 200; ++d) all.push_back("2020-" + std::string(d < 100 ? "01" : "02") + "-" + std::to_string(1000 + d));
  s[0].ticker = "FULL";
  s[0].dates = all;
  s[0].prices.assign(all.size(), 1.0);
  s[1].ticker = "ONEGAP";  // 1 of 200 missing: 0.5%, kept
  s[1].dates = all;
  s[1].dates.erase(s[1].dates.begin() + 50);
  s[1].prices.assign(s[1].dates.size(), 2.0);
  s[2].ticker = "SPARSE";  // 5 of 200 missing: 2.5%, dropped
  s[2].dates = all;
  s[2].dates.erase(s[2].dates.begin() + 10, s[2].dates.begin() + 15);
  s[2].prices.assign(s[2].dates.size(), 3.0);
  const auto panel = align_prices(s);
  REQUIRE(panel.series.size() == 2);
  CHECK(panel.series[0].ticker == "FULL");
  CHECK(panel.series[1].ticker == "ONEGAP");
  CHECK(panel.dates.size() == 199);
  REQUIRE(panel.warnings.size() == 2);
  CHECK(panel.warnings[0].find("SPARSE") != std::string::npos);
}

TEST_CASE("return pipeline and serialization round trip") {
  PricePanel panel;
  for (int d = 0; d < 10; ++d) panel.dates.push_back("2021-03-" + std::to_string(10 + d));
  const char* names[] = {"X", "Y", "Z"};
  for (int k = 0; k < 3; ++k) {
    PriceSeries ps;
    ps.ticker = names[k];
    ps.dates = panel.dates;
    for (int d = 0; d < 10; ++d) ps.prices.push_back(100.0 + k + std::sin(d * (k + 1.0)));
    panel.series.push_back(ps);
  }
  const auto orig = original_returns(panel);
  CHECK(orig.rows() == 9);
  CHECK(orig.cols() == 3);
  CHECK(orig.dates.front() == "2021-03-11");
  CHECK(kind_of([&] { locally_normalized_returns(orig, 13); }) == ErrorKind::kInsufficientData);

  const auto local = locally_normalized_returns(orig, 4, WindowAlignment::kStrictlyPreceding);
  CHECK(local.rows() == 5);
  CHECK(local.dates.front() == "2021-03-15");
  std::ostringstream out;
  write_return_matrix(out, local);
  CHECK(out.str().rfind("# kind=locally_normalized, window=4, alignment=strictly_preceding\n", 0) == 0);
  std::istringstream in(out.str());
  const auto back = read_return_matrix(in);
  CHECK(back.kind == ReturnKind::kLocallyNormalized);
  CHECK(back.window == 4);
  CHECK(back.alignment == WindowAlignment::kStrictlyPreceding);
  CHECK(back.tickers == local.tickers);
  CHECK(back.dates == local.dates);
  CHECK(back.columns == local.columns);
}

TEST_CASE("diagnose flags badly normalized columns") {
  ReturnMatrix m;
  m.kind = ReturnKind::kLocallyNormalized;
  m.window = 13;
  m.tickers = {"OK", "SHIFTED"};
  auto good = normals(400, 8);
  auto shifted = good;
  for (auto& x : shifted) x += 0.5;
  m.columns = {good, shifted};
  const auto msgs = diagnose(m);
  REQUIRE(msgs.size() == 1);
  CHECK(msgs[0].find("SHIFTED") != std::string::npos);
}
