#pragma once

// Univariate margins of the K-distribution and of the skewed Student's t
// distribution. Both are normal variance(-mean) mixtures over a gamma variate
// z ~ Gamma(shape, 1):
//
//   K:         X | z ~ Normal(0, 2z/N),                      shape = N/2
//   skewed t:  X | z ~ Normal(gamma W, W), W = nu / (2z),    shape = nu/2
//
// so W ~ InverseGamma(nu/2, nu/2) and gamma = 0 gives Student's t with nu
// degrees of freedom. Densities use the Bessel closed forms; distribution
// functions use the gamma-weighted quadrature of the normal CDF.

#include <memory>

#include "copula/numerics.hpp"

namespace copula::marginals {

// Quadrature used for distribution functions: Gauss-Laguerre first, adaptive
// Gauss-Kronrod when the Laguerre rule does not settle.
numerics::QuadratureSpec cdf_quadrature();

class KMarginal {
 public:
  explicit KMarginal(double n);

  double n() const { return n_; }

  double log_pdf(double x) const;
  double pdf(double x) const;
  // Mixture form of the density, for cross-checks.
  double pdf_mixture(double x, const numerics::QuadratureSpec& spec = {}) const;
  double cdf(double x) const;
  double sf(double x) const;

  // Table lookup, with direct inversion outside the tabulated range.
  double quantile(double p) const;
  double quantile_direct(double p) const;

  // Shared, cached per parameter value.
  std::shared_ptr<const numerics::TabulatedQuantile> table() const;

 private:
  double n_;
};

class SkewedTMarginal {
 public:
  SkewedTMarginal(double nu, double gamma);

  double nu() const { return nu_; }
  double gamma() const { return gamma_; }
  bool symmetric() const;

  double log_pdf(double x) const;
  double pdf(double x) const;
  double pdf_mixture(double x, const numerics::QuadratureSpec& spec = {}) const;
  double cdf(double x) const;
  double sf(double x) const;

  double quantile(double p) const;
  double quantile_direct(double p) const;

  std::shared_ptr<const numerics::TabulatedQuantile> table() const;

 private:
  double nu_;
  double gamma_;
};

// Log density of the bivariate K-distribution with unit variances and
// correlation c.
double k_joint_log_pdf(double x, double y, double c, double n);

// Log density of the bivariate skewed t with unit-diagonal Sigma (correlation
// c) and equal skewness gamma in both components.
double skewed_t_joint_log_pdf(double x, double y, double c, double nu, double gamma);

// Joint distribution functions P(X <= x, Y <= y) of the same laws, as
// gamma-mixture integrals of the bivariate normal CDF (adaptive rule).
double k_joint_cdf(double x, double y, double c, double n);
double skewed_t_joint_cdf(double x, double y, double c, double nu, double gamma);

// Below this |gamma| the symmetric Student's t closed form is used.
inline constexpr double kSymmetricGammaThreshold = 1e-6;

}  // namespace copula::marginals
