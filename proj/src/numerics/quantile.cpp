#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "copula/errors.hpp"
#include "copula/numerics.hpp"

namespace copula::numerics {
namespace {

constexpr int kMaxExpansions = 2000;
constexpr int kMaxRefinements = 300;

double target_tolerance(double p) {
  // Well inside the public contract; relative in the tails.
  return std::min(1e-13, 1e-8 * std::min(p, 1.0 - p));
}

// Bracketed Newton / bisection. Requires F(lo) < p < F(hi), with hi allowed
// to be +inf and lo -inf, in which case steps widen geometrically.
double refine_root(const Integrand& cdf, const Integrand& pdf, double p, double lo, double hi,
                   double x) {
  const double tol = target_tolerance(p);
  double best_x = x;
  double best_err = std::numeric_limits<double>::infinity();
  double step_scale = std::max(1.0, std::abs(x));
  for (int iter = 0; iter < kMaxRefinements; ++iter) {
    const double fx = cdf(x) - p;
    if (std::abs(fx) < best_err) {
      best_err = std::abs(fx);
      best_x = x;
    }
    if (std::abs(fx) <= tol) return x;
    if (fx < 0.0) {
      lo = x;
    } else {
      hi = x;
    }
    if (std::isfinite(lo) && std::isfinite(hi) &&
        hi - lo <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
      break;
    }
    double next = std::numeric_limits<double>::quiet_NaN();
    if (pdf) {
      const double d = pdf(x);
      if (d > 0.0 && std::isfinite(d)) next = x - fx / d;
    }
    const bool inside = std::isfinite(next) && next > lo && next < hi;
    if (!inside) {
      if (std::isfinite(lo) && std::isfinite(hi)) {
        next = 0.5 * (lo + hi);
      } else if (std::isfinite(lo)) {
        step_scale *= 2.0;
        next = lo + step_scale;
      } else {
        step_scale *= 2.0;
        next = hi - step_scale;
      }
    }
    x = next;
  }
  return best_x;
}

void check_probability(double p, const char* who) {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorKind::kRange, std::string(who) + ": probability must lie in (0, 1), got " +
                                std::to_string(p));
  }
}

}  // namespace

double invert_monotone_cdf(const Integrand& cdf, double p, Interval span, const Integrand& pdf) {
  check_probability(p, "invert_monotone_cdf");
  double lo = std::min(span.lo, span.hi);
  double hi = std::max(span.lo, span.hi);
  double width = std::max(hi - lo, 1.0);
  double f_lo = cdf(lo);
  int guard = 0;
  while (f_lo > p) {
    hi = lo;
    lo -= width;
    width *= 2.0;
    if (++guard > kMaxExpansions || !std::isfinite(lo)) {
      fail(ErrorKind::kRange, "invert_monotone_cdf: probability " + std::to_string(p) +
                                  " below the range of the distribution function");
    }
    f_lo = cdf(lo);
  }
  double f_hi = cdf(hi);
  while (f_hi < p) {
    lo = hi;
    hi += width;
    width *= 2.0;
    if (++guard > kMaxExpansions || !std::isfinite(hi)) {
      fail(ErrorKind::kRange, "invert_monotone_cdf: probability " + std::to_string(p) +
                                  " above the range of the distribution function");
    }
    f_hi = cdf(hi);
  }
  if (f_lo == p) return lo;
  if (f_hi == p) return hi;
  // Secant start inside the bracket.
  double x = lo + (p - f_lo) / (f_hi - f_lo) * (hi - lo);
  if (!(x > lo && x < hi)) x = 0.5 * (lo + hi);
  return refine_root(cdf, pdf, p, lo, hi, x);
}

// ---------------------------------------------------------------------------

namespace {

// Integral of the density between neighbouring nodes.
double density_mass(const Integrand& pdf, double a, double b) {
  const double zero[] = {0.0};
  const bool straddles = a < 0.0 && b > 0.0;
  return adaptive_integrate(pdf, a, b, 1e-11, 0.0,
                            straddles ? std::span<const double>(zero) : std::span<const double>());
}

struct Node {
  double s;
  double x;
  double F;
};

double node_slope(const Integrand& pdf, double s, double x, double fallback) {
  const double d = pdf(x);
  const double slope = std_normal_pdf(s) / d;
  return (std::isfinite(slope) && slope > 0.0) ? slope : fallback;
}

}  // namespace

TabulatedQuantile TabulatedQuantile::build(const DistributionFunctions& law, Interval span,
                                           const Options& options, bool symmetric) {
  if (options.points < 3) fail(ErrorKind::kParameter, "TabulatedQuantile: need >= 3 points");
  if (!(options.p_min > 0.0 && options.p_min < 0.5)) {
    fail(ErrorKind::kParameter, "TabulatedQuantile: p_min must lie in (0, 1/2)");
  }
  if (!law.cdf || !law.pdf) fail(ErrorKind::kParameter, "TabulatedQuantile: cdf and pdf required");
  const Integrand sf = law.sf ? law.sf : Integrand([&](double x) { return 1.0 - law.cdf(x); });

  const double h = -2.0 * std_normal_quantile(options.p_min) / (options.points - 1);
  const double p_start = 0.999 * options.p_min;
  const std::size_t max_nodes = 20 * static_cast<std::size_t>(options.points);
  const auto too_many = [&] {
    fail(ErrorKind::kAccuracy, "TabulatedQuantile: node placement did not terminate");
  };

  // Lower half: F accumulates upward from the lower tail anchor.
  std::vector<Node> lower;
  {
    double x = invert_monotone_cdf(law.cdf, p_start, span, law.pdf);
    double F = law.cdf(x);
    double s = std_normal_quantile(F);
    double slope = node_slope(law.pdf, s, x, 1.0);
    lower.push_back({s, x, F});
    while (true) {
      if (lower.size() > max_nodes) too_many();
      const double dx = slope * h;
      double x_next = x + dx;
      if (symmetric && x_next >= -0.25 * dx) {
        const double F0 = F + density_mass(law.pdf, x, 0.0);
        if (std::abs(F0 - 0.5) > 1e-9) {
          fail(ErrorKind::kAccuracy, "TabulatedQuantile: lower half does not carry mass 1/2 (" +
                                         std::to_string(F0) + "); law not symmetric?");
        }
        lower.push_back({0.0, 0.0, 0.5});
        break;
      }
      if (!symmetric && F >= 0.5) break;
      F += density_mass(law.pdf, x, x_next);
      x = x_next;
      if (!(F < 1.0)) break;
      s = std_normal_quantile(F);
      slope = node_slope(law.pdf, s, x, slope);
      lower.push_back({s, x, F});
    }
  }

  std::vector<Node> nodes;
  if (symmetric) {
    nodes = lower;
    for (std::size_t i = lower.size() - 1; i-- > 0;) {
      nodes.push_back({-lower[i].s, -lower[i].x, 1.0 - lower[i].F});
    }
  } else {
    // Upper half: survival mass accumulates downward from the upper anchor.
    std::vector<Node> upper;
    const Integrand neg_sf = [&](double x) { return 1.0 - sf(x); };
    double x = invert_monotone_cdf(neg_sf, 1.0 - p_start, span, law.pdf);
    // Nudge outward until the anchor sits beyond 1 - p_min in survival terms.
    double S = sf(x);
    for (int k = 0; S > p_start && k < 200; ++k) {
      x += std::max(1.0, std::abs(x)) * 1e-3;
      S = sf(x);
    }
    double s = -std_normal_quantile(S);
    double slope = node_slope(law.pdf, s, x, 1.0);
    upper.push_back({s, x, 1.0 - S});
    while (S < 0.5) {
      if (upper.size() > max_nodes) too_many();
      const double x_next = x - slope * h;
      S += density_mass(law.pdf, x_next, x);
      x = x_next;
      if (!(S < 1.0)) break;
      s = -std_normal_quantile(S);
      slope = node_slope(law.pdf, s, x, slope);
      upper.push_back({s, x, 1.0 - S});
    }
    for (const Node& n : lower) {
      if (n.s <= 0.0) nodes.push_back(n);
    }
    for (std::size_t i = upper.size(); i-- > 0;) {
      if (upper[i].s > 0.0) nodes.push_back(upper[i]);
    }
  }

  TabulatedQuantile table;
  for (const Node& n : nodes) {
    if (!table.grid_s_.empty() && !(n.s > table.grid_s_.back() && n.x > table.grid_x_.back())) {
      fail(ErrorKind::kAccuracy, "TabulatedQuantile: distribution function is not strictly "
                                 "increasing over the tabulated range");
    }
    table.grid_s_.push_back(n.s);
    table.grid_x_.push_back(n.x);
    table.grid_F_.push_back(n.F);
  }
  if (table.grid_s_.size() < 3) fail(ErrorKind::kAccuracy, "TabulatedQuantile: too few nodes");

  const std::size_t m = table.grid_s_.size();
  table.slope_.resize(m);
  for (std::size_t i = 0; i < m; ++i) {
    table.slope_[i] = node_slope(law.pdf, table.grid_s_[i], table.grid_x_[i], 0.0);
  }
  if (symmetric) {
    for (std::size_t i = 0; i < m / 2; ++i) table.slope_[m - 1 - i] = table.slope_[i];
  }
  // Fritsch-Carlson limiter keeps every cubic piece monotone.
  for (std::size_t i = 0; i + 1 < m; ++i) {
    const double delta =
        (table.grid_x_[i + 1] - table.grid_x_[i]) / (table.grid_s_[i + 1] - table.grid_s_[i]);
    const double a = table.slope_[i] / delta;
    const double b = table.slope_[i + 1] / delta;
    const double r2 = a * a + b * b;
    if (r2 > 9.0) {
      const double tau = 3.0 / std::sqrt(r2);
      table.slope_[i] = tau * a * delta;
      table.slope_[i + 1] = tau * b * delta;
    }
  }
  return table;
}

bool TabulatedQuantile::covers(double p) const {
  if (!(p > 0.0 && p < 1.0) || grid_s_.empty()) return false;
  const double s = std_normal_quantile(p);
  return s >= grid_s_.front() && s <= grid_s_.back();
}

double TabulatedQuantile::operator()(double p) const {
  if (!(p > 0.0 && p < 1.0)) {
    fail(ErrorKind::kRange, "TabulatedQuantile: probability must lie in (0, 1)");
  }
  const double s = std_normal_quantile(p);
  if (s < grid_s_.front() || s > grid_s_.back()) {
    fail(ErrorKind::kRange,
         "TabulatedQuantile: probability " + std::to_string(p) + " outside the tabulated range");
  }
  auto it = std::upper_bound(grid_s_.begin(), grid_s_.end(), s);
  std::size_t i = it == grid_s_.begin() ? 0 : static_cast<std::size_t>(it - grid_s_.begin()) - 1;
  if (i + 1 >= grid_s_.size()) i = grid_s_.size() - 2;
  const double width = grid_s_[i + 1] - grid_s_[i];
  const double t = (s - grid_s_[i]) / width;
  const double x0 = grid_x_[i];
  const double x1 = grid_x_[i + 1];
  const double m0 = slope_[i] * width;
  const double m1 = slope_[i + 1] * width;
  const double t2 = t * t;
  const double t3 = t2 * t;
  return (2.0 * t3 - 3.0 * t2 + 1.0) * x0 + (t3 - 2.0 * t2 + t) * m0 +
         (-2.0 * t3 + 3.0 * t2) * x1 + (t3 - t2) * m1;
}

TabulatedQuantile build_quantile_table(const Integrand& cdf, const Integrand& pdf,
                                       Interval span) {
  return TabulatedQuantile::build({cdf, nullptr, pdf}, span, TabulatedQuantile::Options{});
}

}  // namespace copula::numerics
