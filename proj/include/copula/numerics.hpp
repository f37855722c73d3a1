#pragma once

// Special functions, quadrature and monotone inversion used by the analytic
// copula families. Everything here is pure; rule and table objects are
// immutable after construction and safe to share across threads.

#include <functional>
#include <iosfwd>
#include <memory>
#include <span>
#include <vector>

namespace copula::numerics {

// ---------------------------------------------------------------------------
// Modified Bessel function of the second kind K_order(x), real order, x > 0.
// ---------------------------------------------------------------------------

double bessel_k(double order, double x);

// exp(x) * K_order(x); finite wherever K underflows for large x.
double bessel_k_scaled(double order, double x);

// log(exp(x) K_order(x)).
double log_bessel_k_scaled(double order, double x);

// log K_order(x); finite for large orders where K itself overflows.
double log_bessel_k(double order, double x);

// ---------------------------------------------------------------------------
// Standard normal distribution.
// ---------------------------------------------------------------------------

double std_normal_pdf(double x);
double std_normal_cdf(double x);
// 1 - cdf(x) without cancellation.
double std_normal_sf(double x);
// Inverse of std_normal_cdf; throws kDomain outside (0, 1).
double std_normal_quantile(double p);

// P(X <= h, Y <= k) for standard normals with correlation rho, |rho| <= 1.
// Drezner-Wesolowsky / Genz, absolute error ~1e-15.
double bivariate_normal_cdf(double h, double k, double rho);

// ---------------------------------------------------------------------------
// Quadrature against the gamma weight z^(shape-1) e^(-z) on (0, inf).
// ---------------------------------------------------------------------------

enum class QuadratureScheme { kGeneralizedGaussLaguerre, kAdaptive };

struct QuadratureSpec {
  QuadratureScheme scheme = QuadratureScheme::kGeneralizedGaussLaguerre;
  int nodes = 64;
  double rel_tol = 1e-9;
  // Gauss-Laguerre doubling stops here.
  int max_nodes = 4096;

  // nodes >= 8 and rel_tol in (0, 1e-3]; throws kParameter otherwise.
  void validate() const;
};

// Nodes and weights for the normalized measure z^alpha e^(-z) / Gamma(alpha+1);
// the weights sum to one.
struct GaussLaguerreRule {
  double alpha = 0.0;
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Golub-Welsch on the Laguerre Jacobi matrix. alpha > -1, n >= 1.
GaussLaguerreRule compute_gauss_laguerre_rule(double alpha, int n);

// Cached variant of compute_gauss_laguerre_rule.
std::shared_ptr<const GaussLaguerreRule> gauss_laguerre_rule(double alpha, int n);

// CSV dump "node,weight" for inspection.
void write_rule_csv(std::ostream& os, const GaussLaguerreRule& rule);

using Integrand = std::function<double(double)>;

// E[f(Z)] for Z ~ Gamma(shape, 1), i.e. the weighted integral divided by
// Gamma(shape). Well defined for shapes where Gamma(shape) overflows.
// Gauss-Laguerre doubles its node count until two successive estimates agree
// to rel_tol; throws AccuracyError carrying the last estimate once
// spec.max_nodes is exceeded.
double gamma_expectation(const Integrand& f, double shape,
                         const QuadratureSpec& spec = {});

// Integral over (0, inf) of z^(shape-1) e^(-z) f(z).
double weighted_exp_integral(const Integrand& f, double shape,
                             const QuadratureSpec& spec = {});

// Fixed rule for E[f(Z)], Z ~ Gamma(shape, 1), built from composite
// Gauss-Legendre panels in t = log z. Used where many integrands share one
// set of nodes; weights sum to one up to a truncated mass below 1e-13.
struct MixtureRule {
  std::vector<double> nodes;  // z values
  std::vector<double> weights;
};

MixtureRule log_gamma_rule(double shape);

// Adaptive Gauss-Kronrod (7/15) on [a, b]. Either bound may be infinite.
// breakpoints (optional, strictly inside (a, b)) seed the initial partition.
double adaptive_integrate(const Integrand& f, double a, double b,
                          double rel_tol = 1e-10, double abs_tol = 0.0,
                          std::span<const double> breakpoints = {});

// ---------------------------------------------------------------------------
// Monotone inversion.
// ---------------------------------------------------------------------------

struct Interval {
  double lo;
  double hi;
};

// Tolerance on |F(x) - p| reached by invert_monotone_cdf.
inline constexpr double kInversionTolerance = 1e-10;

// Solves F(x) = p for strictly increasing F. The search starts from `span`
// and widens it geometrically when p lies outside [F(lo), F(hi)]; throws
// kRange when p is outside the range F achieves. `pdf`, when supplied, is the
// derivative of F and enables safeguarded Newton steps.
double invert_monotone_cdf(const Integrand& cdf, double p, Interval span,
                           const Integrand& pdf = nullptr);

// Distribution functions of a continuous law. `sf` is 1 - cdf evaluated
// without cancellation in the upper tail.
struct DistributionFunctions {
  Integrand cdf;
  Integrand sf;
  Integrand pdf;
};

// Quantile function stored as a monotone cubic Hermite interpolant of x in
// s = Phi^-1(F), on nodes spaced roughly evenly in s. Nodes are placed by
// integrating the density outward from both tails, which keeps relative
// accuracy in each tail.
class TabulatedQuantile {
 public:
  struct Options {
    int points = 2001;
    double p_min = 1e-8;  // table covers at least [p_min, 1 - p_min]
  };

  // `span` brackets the bulk of the distribution and seeds the tail searches.
  // With `symmetric` the law must be symmetric about zero; the upper half is
  // then the exact mirror image of the lower half.
  static TabulatedQuantile build(const DistributionFunctions& law, Interval span,
                                 const Options& options, bool symmetric = false);

  // Throws kRange outside the tabulated range.
  double operator()(double p) const;

  bool covers(double p) const;

  const std::vector<double>& grid_x() const { return grid_x_; }
  const std::vector<double>& grid_F() const { return grid_F_; }
  std::size_t size() const { return grid_x_.size(); }

 private:
  std::vector<double> grid_s_;
  std::vector<double> grid_x_;
  std::vector<double> grid_F_;
  std::vector<double> slope_;  // dx/ds at the nodes, after limiting
};

// Table with default options; sf is taken as 1 - cdf.
TabulatedQuantile build_quantile_table(const Integrand& cdf, const Integrand& pdf, Interval span);

}  // namespace copula::numerics
