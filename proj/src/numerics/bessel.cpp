#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "copula/errors.hpp"
#include "copula/numerics.hpp"

namespace copula::numerics {
namespace {

constexpr double kEps = 1e-16;
constexpr int kMaxIter = 10000;
constexpr double kSeriesCrossover = 2.0;

double chebyshev_eval(const double* c, int m, double x) {
  double d = 0.0;
  double dd = 0.0;
  const double y2 = 2.0 * x;
  for (int j = m - 1; j >= 1; --j) {
    const double sv = d;
    d = y2 * d - dd + c[j];
    dd = sv;
  }
  return x * d - dd + 0.5 * c[0];
}

// gam1 = (1/G(1-mu) - 1/G(1+mu)) / (2 mu), gam2 = (1/G(1-mu) + 1/G(1+mu)) / 2
// for |mu| <= 1/2, via Chebyshev expansions in 8 mu^2 - 1.
struct TemmeGammas {
  double gam1;
  double gam2;
  double gampl;  // 1 / Gamma(1 + mu)
  double gammi;  // 1 / Gamma(1 - mu)
};

TemmeGammas temme_gammas(double mu) {
  static constexpr double c1[] = {-1.142022680371168e0, 6.5165112670737e-3,
                                  3.087090173086e-4,    -3.4706269649e-6,
                                  6.9437664e-9,         3.67795e-11,
                                  -1.356e-13};
  static constexpr double c2[] = {1.843740587300905e0, -7.68528408447867e-2,
                                  1.2719271366546e-3,  -4.9717367042e-6,
                                  -3.31261198e-8,      2.423096e-10,
                                  -1.702e-13,          -1.49e-15};
  const double xx = 8.0 * mu * mu - 1.0;
  TemmeGammas g{};
  g.gam1 = chebyshev_eval(c1, 7, xx);
  g.gam2 = chebyshev_eval(c2, 8, xx);
  g.gampl = g.gam2 - mu * g.gam1;
  g.gammi = g.gam2 + mu * g.gam1;
  return g;
}

// log(exp(x) K_mu(x)) and log(exp(x) K_{mu+1}(x)) for |mu| <= 1/2.
struct KPair {
  double log_k_mu;
  double log_k_mu1;
};

KPair bessel_k_base_scaled(double mu, double x) {
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  const double mu2 = mu * mu;
  if (x < kSeriesCrossover) {
    // Temme's series.
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * mu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    const TemmeGammas g = temme_gammas(mu);
    double ff = fact * (g.gam1 * std::cosh(e) + g.gam2 * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / g.gampl;
    double q = 0.5 / (e * g.gammi);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    int i = 1;
    for (; i <= kMaxIter; ++i) {
      ff = (i * ff + p + q) / (i * static_cast<double>(i) - mu2);
      c *= d / i;
      p /= i - mu;
      q /= i + mu;
      const double del = c * ff;
      sum += del;
      const double del1 = c * (p - i * ff);
      sum1 += del1;
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    if (i > kMaxIter) throw AccuracyError("bessel_k: series did not converge", sum);
    return {std::log(sum) + x, std::log(sum1) + std::log(xi2) + x};
  }
  // Steed's continued fraction CF2 with Temme's normalization.
  double b = 2.0 * (1.0 + x);
  double d = 1.0 / b;
  double h = d;
  double delh = d;
  double q1 = 0.0;
  double q2 = 1.0;
  const double a1 = 0.25 - mu2;
  double q = a1;
  double c = a1;
  double a = -a1;
  double s = 1.0 + q * delh;
  int i = 2;
  for (; i <= kMaxIter; ++i) {
    a -= 2 * (i - 1);
    c = -a * c / i;
    const double qnew = (q1 - b * q2) / a;
    q1 = q2;
    q2 = qnew;
    q += c * qnew;
    b += 2.0;
    d = 1.0 / (b + a * d);
    delh = (b * d - 1.0) * delh;
    h += delh;
    const double dels = q * delh;
    s += dels;
    if (std::abs(dels / s) < kEps) break;
  }
  if (i > kMaxIter) throw AccuracyError("bessel_k: continued fraction did not converge", s);
  h = a1 * h;
  const double k_mu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
  const double k_mu1 = k_mu * (mu + x + 0.5 - h) * xi;
  return {std::log(k_mu), std::log(k_mu1)};
}

void check_argument(double x) {
  if (!(x > 0.0) || std::isinf(x)) {
    throw Error(ErrorKind::kDomain, "bessel_k: argument must be positive and finite, got " +
                                        std::to_string(x));
  }
}

}  // namespace

// Upward recurrence from |mu| <= 1/2 to the requested order. Returns
// log(exp(x) K_order(x)); rescales on the way so large orders stay finite.
double log_bessel_k_scaled(double order, double x) {
  check_argument(x);
  const double nu = std::abs(order);
  const int nl = static_cast<int>(nu + 0.5);
  const double mu = nu - nl;
  const KPair base = bessel_k_base_scaled(mu, x);
  if (nl == 0) return base.log_k_mu;
  // k_hi is kept at 1 with its magnitude carried in log_scale.
  double log_scale = base.log_k_mu1;
  double k_lo = std::exp(base.log_k_mu - base.log_k_mu1);
  const double xi2 = 2.0 / x;
  for (int i = 1; i < nl; ++i) {
    const double next = (mu + i) * xi2 + k_lo;
    k_lo = 1.0 / next;
    log_scale += std::log(next);
  }
  return log_scale;
}

double bessel_k_scaled(double order, double x) {
  return std::exp(log_bessel_k_scaled(order, x));
}

double bessel_k(double order, double x) {
  return std::exp(log_bessel_k_scaled(order, x) - x);
}

double log_bessel_k(double order, double x) { return log_bessel_k_scaled(order, x) - x; }

}  // namespace copula::numerics
