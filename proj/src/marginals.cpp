#include "copula/marginals.hpp"

#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <string>
#include <tuple>

#include "copula/errors.hpp"

namespace copula::marginals {

using numerics::Interval;
using numerics::QuadratureScheme;
using numerics::QuadratureSpec;
using numerics::TabulatedQuantile;

namespace {

constexpr double kLog2 = std::numbers::ln2;
constexpr double kLogPi = 1.1447298858494002;       // log(pi)
constexpr double kLog2Pi = 1.8378770664093453;      // log(2 pi)
constexpr double kInf = std::numeric_limits<double>::infinity();

// Gamma expectation with a short Laguerre ladder and adaptive fallback.
double mixture_expectation(const numerics::Integrand& f, double shape) {
  try {
    return numerics::gamma_expectation(f, shape, cdf_quadrature());
  } catch (const AccuracyError&) {
    QuadratureSpec adaptive = cdf_quadrature();
    adaptive.scheme = QuadratureScheme::kAdaptive;
    return numerics::gamma_expectation(f, shape, adaptive);
  }
}

// Tables keyed by family and parameters. Bounded; cleared wholesale when full.
std::shared_ptr<const TabulatedQuantile> cached_table(
    int family, double a, double b, const std::function<TabulatedQuantile()>& build) {
  static std::mutex mutex;
  static std::map<std::tuple<int, double, double>, std::shared_ptr<const TabulatedQuantile>> cache;
  constexpr std::size_t kMaxEntries = 64;
  const auto key = std::make_tuple(family, a, b);
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto table = std::make_shared<const TabulatedQuantile>(build());
  std::lock_guard<std::mutex> lock(mutex);
  if (cache.size() >= kMaxEntries) cache.clear();
  cache.emplace(key, table);
  return table;
}

// log( 2 (b/a)^(lambda/2) K_lambda(2 sqrt(a b)) ) written in the variables the
// densities use: arg = 2 sqrt(a b), ratio = b / a.
double log_gig_kernel(double lambda, double log_ratio, double arg) {
  return kLog2 + 0.5 * lambda * log_ratio + numerics::log_bessel_k(lambda, arg);
}

double adaptive_expectation(const numerics::Integrand& f, double shape) {
  QuadratureSpec adaptive = cdf_quadrature();
  adaptive.scheme = QuadratureScheme::kAdaptive;
  return numerics::gamma_expectation(f, shape, adaptive);
}

}  // namespace

QuadratureSpec cdf_quadrature() {
  QuadratureSpec spec;
  spec.scheme = QuadratureScheme::kGeneralizedGaussLaguerre;
  spec.nodes = 64;
  spec.rel_tol = 1e-12;
  spec.max_nodes = 256;
  return spec;
}

// ---------------------------------------------------------------------------
// K margin
// ---------------------------------------------------------------------------

KMarginal::KMarginal(double n) : n_(n) {
  if (!(n > 0.0) || !std::isfinite(n)) {
    fail(ErrorKind::kParameter, "K margin: N must be positive, got " + std::to_string(n));
  }
}

double KMarginal::log_pdf(double x) const {
  const double n = n_;
  const double arg = std::sqrt(n) * std::abs(x);
  const double lambda = 0.5 * (n - 1.0);
  if (arg == 0.0) {
    if (n <= 1.0) return kInf;
    return 0.5 * std::log(n / (4.0 * std::numbers::pi)) + std::lgamma(lambda) -
           std::lgamma(0.5 * n);
  }
  // f(x) = sqrt(N / 4pi) / Gamma(N/2) * 2 (N x^2 / 4)^(lambda/2) K_lambda(sqrt(N) |x|)
  return 0.5 * std::log(n / (4.0 * std::numbers::pi)) - std::lgamma(0.5 * n) +
         log_gig_kernel(lambda, 2.0 * std::log(0.5 * arg), arg);
}

double KMarginal::pdf(double x) const { return std::exp(log_pdf(x)); }

double KMarginal::pdf_mixture(double x, const QuadratureSpec& spec) const {
  const double n = n_;
  return numerics::gamma_expectation(
      [x, n](double z) {
        const double sd = std::sqrt(2.0 * z / n);
        return numerics::std_normal_pdf(x / sd) / sd;
      },
      0.5 * n, spec);
}

double KMarginal::cdf(double x) const {
  if (x == 0.0) return 0.5;
  const double n = n_;
  return mixture_expectation(
      [x, n](double z) { return numerics::std_normal_cdf(x * std::sqrt(n / (2.0 * z))); },
      0.5 * n);
}

double KMarginal::sf(double x) const { return cdf(-x); }

std::shared_ptr<const TabulatedQuantile> KMarginal::table() const {
  const KMarginal self = *this;
  return cached_table(0, n_, 0.0, [self] {
    numerics::DistributionFunctions law{[&](double x) { return self.cdf(x); },
                                        [&](double x) { return self.sf(x); },
                                        [&](double x) { return self.pdf(x); }};
    return TabulatedQuantile::build(law, Interval{-1.0, 1.0}, TabulatedQuantile::Options{},
                                    /*symmetric=*/true);
  });
}

double KMarginal::quantile_direct(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorKind::kRange, "K margin quantile: probability must lie in (0, 1)");
  }
  if (p == 0.5) return 0.0;
  if (p > 0.5) return -quantile_direct(1.0 - p);
  return numerics::invert_monotone_cdf([this](double x) { return cdf(x); }, p,
                                       Interval{-1.0, 0.0}, [this](double x) { return pdf(x); });
}

double KMarginal::quantile(double p) const {
  // Upper half mirrors the lower half exactly; 1 - p is exact for p > 1/2.
  if (p > 0.5 && p < 1.0) return -quantile(1.0 - p);
  if (p == 0.5) return 0.0;
  auto t = table();
  if (t->covers(p)) return (*t)(p);
  return quantile_direct(p);
}

double k_joint_log_pdf(double x, double y, double c, double n) {
  const double one_minus_c2 = 1.0 - c * c;
  const double q = (x * x + y * y - 2.0 * c * (x * y)) / one_minus_c2;
  const double lambda = 0.5 * n - 1.0;
  const double log_prefactor =
      std::log(n / (4.0 * std::numbers::pi)) - 0.5 * std::log(one_minus_c2) - std::lgamma(0.5 * n);
  const double arg = std::sqrt(n * q);
  if (arg == 0.0) {
    if (n <= 2.0) return kInf;
    return log_prefactor + std::lgamma(lambda);
  }
  // N / (4 pi sqrt(1-c^2) Gamma(N/2)) * 2 (N q / 4)^(lambda/2) K_lambda(sqrt(N q))
  return log_prefactor + log_gig_kernel(lambda, 2.0 * std::log(0.5 * arg), arg);
}

// ---------------------------------------------------------------------------
// Skewed t margin
// ---------------------------------------------------------------------------

SkewedTMarginal::SkewedTMarginal(double nu, double gamma) : nu_(nu), gamma_(gamma) {
  if (!(nu > 2.0) || !std::isfinite(nu)) {
    fail(ErrorKind::kParameter, "skewed t margin: nu must exceed 2, got " + std::to_string(nu));
  }
  if (!std::isfinite(gamma)) fail(ErrorKind::kParameter, "skewed t margin: gamma must be finite");
}

bool SkewedTMarginal::symmetric() const { return std::abs(gamma_) < kSymmetricGammaThreshold; }

double SkewedTMarginal::log_pdf(double x) const {
  const double nu = nu_;
  if (symmetric()) {
    return std::lgamma(0.5 * (nu + 1.0)) - std::lgamma(0.5 * nu) - 0.5 * (std::log(nu) + kLogPi) -
           0.5 * (nu + 1.0) * std::log1p(x * x / nu);
  }
  const double g = gamma_;
  const double spread = nu + x * x;
  const double lambda = 0.5 * (nu + 1.0);
  const double arg = std::sqrt(spread) * std::abs(g);
  // (nu/2)^(nu/2) / (Gamma(nu/2) sqrt(2 pi)) e^(x g) 2 (g^2 / (nu + x^2))^(lambda/2) K_lambda(arg)
  // x g - arg cancels badly in the light tail; there it equals
  // -|g| nu / (|x| + sqrt(nu + x^2)).
  const double root = std::sqrt(spread);
  const double exponent =
      x * g > 0.0 ? -std::abs(g) * nu / (std::abs(x) + root) : x * g - arg;
  return 0.5 * nu * std::log(0.5 * nu) - std::lgamma(0.5 * nu) - 0.5 * kLog2Pi + exponent +
         kLog2 + 0.5 * lambda * std::log(g * g / spread) +
         numerics::log_bessel_k_scaled(lambda, arg);
}

double SkewedTMarginal::pdf(double x) const { return std::exp(log_pdf(x)); }

double SkewedTMarginal::pdf_mixture(double x, const QuadratureSpec& spec) const {
  const double nu = nu_;
  const double g = gamma_;
  return numerics::gamma_expectation(
      [x, nu, g](double z) {
        const double w = nu / (2.0 * z);
        const double sd = std::sqrt(w);
        return numerics::std_normal_pdf((x - g * w) / sd) / sd;
      },
      0.5 * nu, spec);
}

double SkewedTMarginal::cdf(double x) const {
  const double nu = nu_;
  const double g = gamma_;
  // Large W (small z) carries the skewed tail; Gauss-Laguerre has no nodes
  // there, so this always goes through the log-space adaptive rule.
  return adaptive_expectation(
      [x, nu, g](double z) {
        const double w = nu / (2.0 * z);
        return numerics::std_normal_cdf((x - g * w) / std::sqrt(w));
      },
      0.5 * nu);
}

double SkewedTMarginal::sf(double x) const {
  const double nu = nu_;
  const double g = gamma_;
  return adaptive_expectation(
      [x, nu, g](double z) {
        const double w = nu / (2.0 * z);
        return numerics::std_normal_sf((x - g * w) / std::sqrt(w));
      },
      0.5 * nu);
}

std::shared_ptr<const TabulatedQuantile> SkewedTMarginal::table() const {
  const SkewedTMarginal self = *this;
  const bool sym = symmetric();
  return cached_table(1, nu_, sym ? 0.0 : gamma_, [self, sym] {
    numerics::DistributionFunctions law{[&](double x) { return self.cdf(x); },
                                        [&](double x) { return self.sf(x); },
                                        [&](double x) { return self.pdf(x); }};
    return TabulatedQuantile::build(law, Interval{-2.0, 2.0}, TabulatedQuantile::Options{}, sym);
  });
}

double SkewedTMarginal::quantile_direct(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorKind::kRange, "skewed t quantile: probability must lie in (0, 1)");
  }
  if (symmetric()) {
    if (p == 0.5) return 0.0;
    if (p > 0.5) return -quantile_direct(1.0 - p);
  }
  return numerics::invert_monotone_cdf([this](double x) { return cdf(x); }, p,
                                       Interval{-2.0, 2.0}, [this](double x) { return pdf(x); });
}

double SkewedTMarginal::quantile(double p) const {
  if (symmetric()) {
    if (p > 0.5 && p < 1.0) return -quantile(1.0 - p);
    if (p == 0.5) return 0.0;
  }
  auto t = table();
  if (t->covers(p)) return (*t)(p);
  return quantile_direct(p);
}

double skewed_t_joint_log_pdf(double x, double y, double c, double nu, double gamma) {
  const double one_minus_c2 = 1.0 - c * c;
  const double q = (x * x + y * y - 2.0 * c * (x * y)) / one_minus_c2;
  if (std::abs(gamma) < kSymmetricGammaThreshold) {
    return std::lgamma(0.5 * nu + 1.0) - std::lgamma(0.5 * nu) - std::log(nu) - kLogPi -
           0.5 * std::log(one_minus_c2) - (0.5 * nu + 1.0) * std::log1p(q / nu);
  }
  // With gamma_1 = gamma_2 = gamma: z' Sigma^-1 gamma = gamma (x + y) / (1 + c)
  // and gamma' Sigma^-1 gamma = 2 gamma^2 / (1 + c).
  const double tilt = gamma * (x + y) / (1.0 + c);
  const double skew = 2.0 * gamma * gamma / (1.0 + c);
  const double spread = nu + q;
  const double lambda = 0.5 * nu + 1.0;
  const double arg = std::sqrt(spread * skew);
  // tilt^2 - arg^2 = -gamma^2 ((x - y)^2 / (1 - c^2) + 2 nu / (1 + c)), which
  // keeps tilt - arg accurate where the two nearly cancel.
  double exponent = tilt - arg;
  if (tilt > 0.0) {
    const double d = x - y;
    exponent = -gamma * gamma * (d * d / one_minus_c2 + 2.0 * nu / (1.0 + c)) / (tilt + arg);
  }
  return 0.5 * nu * std::log(0.5 * nu) - std::lgamma(0.5 * nu) - kLog2Pi -
         0.5 * std::log(one_minus_c2) + exponent + kLog2 +
         0.5 * lambda * std::log(skew / spread) + numerics::log_bessel_k_scaled(lambda, arg);
}

double k_joint_cdf(double x, double y, double c, double n) {
  return adaptive_expectation(
      [x, y, c, n](double z) {
        const double a = std::sqrt(n / (2.0 * z));
        return numerics::bivariate_normal_cdf(a * x, a * y, c);
      },
      0.5 * n);
}

double skewed_t_joint_cdf(double x, double y, double c, double nu, double gamma) {
  return adaptive_expectation(
      [x, y, c, nu, gamma](double z) {
        const double w = nu / (2.0 * z);
        const double root = std::sqrt(w);
        return numerics::bivariate_normal_cdf((x - gamma * w) / root, (y - gamma * w) / root, c);
      },
      0.5 * nu);
}

}  // namespace copula::marginals
