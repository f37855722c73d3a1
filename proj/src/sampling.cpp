#include "copula/sampling.hpp"

#include <cmath>
#include <string>

#include "copula/errors.hpp"

namespace copula::sampling {
namespace {

std::mt19937_64 make_engine(const RngSpec& spec) {
  std::seed_seq seq{static_cast<std::uint32_t>(spec.seed), static_cast<std::uint32_t>(spec.seed >> 32),
                    static_cast<std::uint32_t>(spec.stream),
                    static_cast<std::uint32_t>(spec.stream >> 32)};
  return std::mt19937_64(seq);
}

void check_correlation(double c) {
  if (!(c > -1.0 && c < 1.0)) {
    fail(ErrorKind::kParameter, "sampler: correlation must lie in (-1, 1), got " + std::to_string(c));
  }
}

// Correlated standard normal pair.
void correlated_normals(double c, double s, Rng& rng, double& x, double& y) {
  const double z1 = rng.normal();
  const double z2 = rng.normal();
  x = z1;
  y = c * z1 + s * z2;
}

}  // namespace

Rng::Rng(RngSpec spec) : spec_(spec), engine_(make_engine(spec)) {}

double Rng::normal() { return normal_(engine_); }

double Rng::gamma(double shape) {
  return std::gamma_distribution<double>(shape, 1.0)(engine_);
}

PairSample sample_bivariate_gaussian(double c, std::size_t t, Rng& rng) {
  check_correlation(c);
  const double s = std::sqrt(1.0 - c * c);
  PairSample out{std::vector<double>(t), std::vector<double>(t)};
  for (std::size_t i = 0; i < t; ++i) correlated_normals(c, s, rng, out.x[i], out.y[i]);
  return out;
}

WishartFactor draw_wishart_factor(double c, int n, Rng& rng) {
  check_correlation(c);
  if (n < 1) fail(ErrorKind::kParameter, "Wishart factor: N must be >= 1");
  const double s = std::sqrt(1.0 - c * c);
  WishartFactor a{n, std::vector<double>(n), std::vector<double>(n)};
  for (int k = 0; k < n; ++k) correlated_normals(c, s, rng, a.row0[k], a.row1[k]);
  return a;
}

PairSample sample_k_bivariate(double c, double n, std::size_t t, Rng& rng, KMethod method) {
  check_correlation(c);
  if (!(n > 0.0) || !std::isfinite(n)) fail(ErrorKind::kParameter, "K sampler: N must be positive");
  PairSample out{std::vector<double>(t), std::vector<double>(t)};
  if (method == KMethod::kGammaMixture) {
    const double s = std::sqrt(1.0 - c * c);
    for (std::size_t i = 0; i < t; ++i) {
      const double scale = std::sqrt(2.0 * rng.gamma(0.5 * n) / n);
      double x;
      double y;
      correlated_normals(c, s, rng, x, y);
      out.x[i] = scale * x;
      out.y[i] = scale * y;
    }
    return out;
  }
  if (n != std::floor(n) || n > 1e6) {
    fail(ErrorKind::kParameter,
         "K sampler: the Wishart method needs an integer N, got " + std::to_string(n));
  }
  const int ni = static_cast<int>(n);
  const double inv_sqrt_n = 1.0 / std::sqrt(n);
  for (std::size_t i = 0; i < t; ++i) {
    const WishartFactor a = draw_wishart_factor(c, ni, rng);
    // A g / sqrt(N) with g ~ Normal(0, I_N) has covariance A A^T / N.
    double x = 0.0;
    double y = 0.0;
    for (int k = 0; k < ni; ++k) {
      const double g = rng.normal();
      x += a.row0[k] * g;
      y += a.row1[k] * g;
    }
    out.x[i] = x * inv_sqrt_n;
    out.y[i] = y * inv_sqrt_n;
  }
  return out;
}

std::vector<double> sample_inverse_gamma_mixing(double nu, std::size_t t, Rng& rng) {
  if (!(nu > 2.0) || !std::isfinite(nu)) fail(ErrorKind::kParameter, "skewed t sampler: nu must exceed 2");
  std::vector<double> w(t);
  for (std::size_t i = 0; i < t; ++i) w[i] = 0.5 * nu / rng.gamma(0.5 * nu);
  return w;
}

PairSample sample_skewed_t_bivariate(double c, double nu, double gamma, std::size_t t, Rng& rng) {
  check_correlation(c);
  if (!(nu > 2.0) || !std::isfinite(nu)) fail(ErrorKind::kParameter, "skewed t sampler: nu must exceed 2");
  if (!std::isfinite(gamma)) fail(ErrorKind::kParameter, "skewed t sampler: gamma must be finite");
  const double s = std::sqrt(1.0 - c * c);
  PairSample out{std::vector<double>(t), std::vector<double>(t)};
  for (std::size_t i = 0; i < t; ++i) {
    const double w = 0.5 * nu / rng.gamma(0.5 * nu);
    const double root = std::sqrt(w);
    double x;
    double y;
    correlated_normals(c, s, rng, x, y);
    out.x[i] = gamma * w + root * x;
    out.y[i] = gamma * w + root * y;
  }
  return out;
}

}  // namespace copula::sampling
