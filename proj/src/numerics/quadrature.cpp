#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <ostream>
#include <queue>
#include <string>
#include <utility>

#include "copula/errors.hpp"
#include "copula/numerics.hpp"

namespace copula::numerics {

void QuadratureSpec::validate() const {
  if (nodes < 8) {
    fail(ErrorKind::kParameter, "QuadratureSpec: nodes must be >= 8, got " + std::to_string(nodes));
  }
  if (!(rel_tol > 0.0 && rel_tol <= 1e-3)) {
    fail(ErrorKind::kParameter,
         "QuadratureSpec: rel_tol must lie in (0, 1e-3], got " + std::to_string(rel_tol));
  }
  if (max_nodes < nodes) fail(ErrorKind::kParameter, "QuadratureSpec: max_nodes below nodes");
}

// ---------------------------------------------------------------------------
// Gauss-Laguerre by Golub-Welsch. The Jacobi matrix of the Laguerre weight
// z^alpha e^-z has diagonal 2i + alpha + 1 and off-diagonal sqrt(i (i + alpha)).
// Implicit QL with Wilkinson shifts; only the first row of the eigenvector
// matrix is accumulated since the weights are its squares.
// ---------------------------------------------------------------------------

GaussLaguerreRule compute_gauss_laguerre_rule(double alpha, int n) {
  if (!(alpha > -1.0) || !std::isfinite(alpha)) {
    fail(ErrorKind::kParameter, "gauss_laguerre_rule: alpha must exceed -1");
  }
  if (n < 1) fail(ErrorKind::kParameter, "gauss_laguerre_rule: need at least one node");

  const auto un = static_cast<std::size_t>(n);
  std::vector<double> d(un);
  std::vector<double> e(un, 0.0);
  std::vector<double> z(un, 0.0);
  for (std::size_t i = 0; i < un; ++i) d[i] = 2.0 * static_cast<double>(i) + alpha + 1.0;
  for (std::size_t i = 0; i + 1 < un; ++i) {
    const double k = static_cast<double>(i + 1);
    e[i] = std::sqrt(k * (k + alpha));
  }
  z[0] = 1.0;

  constexpr double eps = std::numeric_limits<double>::epsilon();
  for (std::size_t l = 0; l < un; ++l) {
    int iter = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < un; ++m) {
        const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= eps * dd) break;
      }
      if (m != l) {
        if (++iter > 100) {
          fail(ErrorKind::kAccuracy, "gauss_laguerre_rule: QL iteration did not converge");
        }
        double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
        double r = std::hypot(g, 1.0);
        g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        bool underflow = false;
        for (std::size_t ii = m; ii-- > l;) {
          const double f = s * e[ii];
          const double b = c * e[ii];
          r = std::hypot(f, g);
          e[ii + 1] = r;
          if (r == 0.0) {
            d[ii + 1] -= p;
            e[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[ii + 1] - p;
          r = (d[ii] - g) * s + 2.0 * c * b;
          p = s * r;
          d[ii + 1] = g + p;
          g = c * r - b;
          const double zf = z[ii + 1];
          z[ii + 1] = s * z[ii] + c * zf;
          z[ii] = c * z[ii] - s * zf;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = 0.0;
      }
    } while (m != l);
  }

  std::vector<std::size_t> order(un);
  for (std::size_t i = 0; i < un; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  GaussLaguerreRule rule;
  rule.alpha = alpha;
  rule.nodes.reserve(un);
  rule.weights.reserve(un);
  for (std::size_t i : order) {
    rule.nodes.push_back(d[i]);
    rule.weights.push_back(z[i] * z[i]);
  }
  return rule;
}

std::shared_ptr<const GaussLaguerreRule> gauss_laguerre_rule(double alpha, int n) {
  static std::mutex mutex;
  static std::map<std::pair<double, int>, std::shared_ptr<const GaussLaguerreRule>> cache;
  constexpr std::size_t kMaxEntries = 512;

  const auto key = std::make_pair(alpha, n);
  {
    std::lock_guard<std::mutex> lock(mutex);
    if (auto it = cache.find(key); it != cache.end()) return it->second;
  }
  auto rule = std::make_shared<const GaussLaguerreRule>(compute_gauss_laguerre_rule(alpha, n));
  std::lock_guard<std::mutex> lock(mutex);
  if (cache.size() >= kMaxEntries) cache.clear();
  cache.emplace(key, rule);
  return rule;
}

void write_rule_csv(std::ostream& os, const GaussLaguerreRule& rule) {
  os << "node,weight\n";
  os.precision(17);
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    os << rule.nodes[i] << ',' << rule.weights[i] << '\n';
  }
}

// ---------------------------------------------------------------------------
// Adaptive Gauss-Kronrod 7/15.
// ---------------------------------------------------------------------------

namespace {

constexpr double kXgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                            0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                            0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                            0.207784955007898467600689403773245, 0.0};
constexpr double kWgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                            0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                            0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                            0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kWg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                           0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

struct Segment {
  double a;
  double b;
  double integral;
  double error;
  bool operator<(const Segment& other) const { return error < other.error; }
};

template <class F>
Segment kronrod(const F& f, double a, double b) {
  const double center = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  const double fc = f(center);
  double resk = fc * kWgk[7];
  double resg = fc * kWg[3];
  for (int j = 0; j < 7; ++j) {
    const double dx = half * kXgk[j];
    const double f1 = f(center - dx);
    const double f2 = f(center + dx);
    resk += kWgk[j] * (f1 + f2);
    if (j % 2 == 1) resg += kWg[j / 2] * (f1 + f2);
  }
  const double integral = resk * half;
  double error = std::abs((resk - resg) * half);
  const double roundoff = 50.0 * std::numeric_limits<double>::epsilon() * std::abs(integral);
  if (error < roundoff) error = roundoff;
  return {a, b, integral, error};
}

template <class F>
double adaptive_finite(const F& f, const std::vector<double>& edges, double rel_tol,
                       double abs_tol) {
  constexpr int kMaxSegments = 20000;
  std::priority_queue<Segment> queue;
  double total = 0.0;
  double total_error = 0.0;
  for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
    Segment s = kronrod(f, edges[i], edges[i + 1]);
    total += s.integral;
    total_error += s.error;
    queue.push(s);
  }
  int count = static_cast<int>(queue.size());
  while (total_error > std::max(abs_tol, rel_tol * std::abs(total))) {
    if (count >= kMaxSegments) {
      throw AccuracyError("adaptive_integrate: segment limit reached", total);
    }
    Segment worst = queue.top();
    const double mid = 0.5 * (worst.a + worst.b);
    if (!(mid > worst.a && mid < worst.b)) {
      // Cannot split further; accept what we have.
      break;
    }
    queue.pop();
    Segment left = kronrod(f, worst.a, mid);
    Segment right = kronrod(f, mid, worst.b);
    total += left.integral + right.integral - worst.integral;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++count;
  }
  // Re-sum to shed drift from the running updates.
  double sum = 0.0;
  while (!queue.empty()) {
    sum += queue.top().integral;
    queue.pop();
  }
  return sum;
}

}  // namespace

double adaptive_integrate(const Integrand& f, double a, double b, double rel_tol, double abs_tol,
                          std::span<const double> breakpoints) {
  if (!(a < b)) {
    if (a == b) return 0.0;
    return -adaptive_integrate(f, b, a, rel_tol, abs_tol, breakpoints);
  }
  std::vector<double> points;
  points.push_back(a);
  for (double p : breakpoints) {
    if (p > a && p < b) points.push_back(p);
  }
  points.push_back(b);
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());

  // Map infinite end segments onto bounded ones. If both ends are infinite and
  // there are no interior points, split at zero.
  if (std::isinf(points.front()) && std::isinf(points.back()) && points.size() == 2) {
    points.insert(points.begin() + 1, 0.0);
  }
  const bool lower_inf = std::isinf(points.front());
  const bool upper_inf = std::isinf(points.back());

  double total = 0.0;
  std::vector<double> finite_edges(points.begin() + (lower_inf ? 1 : 0),
                                   points.end() - (upper_inf ? 1 : 0));
  if (finite_edges.size() >= 2) total += adaptive_finite(f, finite_edges, rel_tol, abs_tol);
  if (upper_inf) {
    const double start = finite_edges.back();
    auto g = [&](double t) {
      const double one_minus = 1.0 - t;
      const double x = start + t / one_minus;
      const double v = f(x);
      return v == 0.0 ? 0.0 : v / (one_minus * one_minus);
    };
    total += adaptive_finite(g, {0.0, 0.5, 1.0}, rel_tol, abs_tol);
  }
  if (lower_inf) {
    const double end = finite_edges.front();
    auto g = [&](double t) {
      const double one_minus = 1.0 - t;
      const double x = end - t / one_minus;
      const double v = f(x);
      return v == 0.0 ? 0.0 : v / (one_minus * one_minus);
    };
    total += adaptive_finite(g, {0.0, 0.5, 1.0}, rel_tol, abs_tol);
  }
  return total;
}

// ---------------------------------------------------------------------------
// Gamma-weighted integrals.
// ---------------------------------------------------------------------------

namespace {

// Integrates in t = log z, where the gamma weight becomes
// exp(shape t - e^t) / Gamma(shape): features of f near z = 0 (which matter for
// heavy-tailed mixtures) get O(1) width instead of being squeezed against the
// origin.
double gamma_expectation_adaptive(const Integrand& f, double shape, double rel_tol) {
  const double log_norm = std::lgamma(shape);
  auto integrand = [&](double t) {
    const double z = std::exp(t);
    const double log_w = shape * t - z - log_norm;
    if (log_w < -745.0 || z == 0.0) return 0.0;
    return std::exp(log_w) * f(z);
  };
  const double t0 = std::log(shape);
  const double sigma = 1.0 / std::sqrt(shape);
  std::vector<double> breaks;
  for (double k : {-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0}) breaks.push_back(t0 + k * sigma);
  const double t_min = t0 - 8.0 * sigma - 45.0 / shape;
  for (double t = t0 - 8.0 * sigma - 2.0; t > t_min; t -= 2.0) breaks.push_back(t);
  constexpr double inf = std::numeric_limits<double>::infinity();
  return adaptive_integrate(integrand, -inf, inf, rel_tol, 0.0, breaks);
}

double laguerre_sum(const Integrand& f, const GaussLaguerreRule& rule) {
  // Neumaier summation; weights span many orders of magnitude.
  double sum = 0.0;
  double comp = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
    const double w = rule.weights[i];
    if (w == 0.0) continue;
    const double term = w * f(rule.nodes[i]);
    const double t = sum + term;
    if (std::abs(sum) >= std::abs(term)) {
      comp += (sum - t) + term;
    } else {
      comp += (term - t) + sum;
    }
    sum = t;
  }
  return sum + comp;
}

}  // namespace

double gamma_expectation(const Integrand& f, double shape, const QuadratureSpec& spec) {
  spec.validate();
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    fail(ErrorKind::kParameter, "gamma_expectation: shape must be positive and finite");
  }
  if (spec.scheme == QuadratureScheme::kAdaptive) {
    return gamma_expectation_adaptive(f, shape, spec.rel_tol);
  }
  const double alpha = shape - 1.0;
  int n = spec.nodes;
  double previous = laguerre_sum(f, *gauss_laguerre_rule(alpha, n));
  while (2 * n <= spec.max_nodes) {
    n *= 2;
    const double current = laguerre_sum(f, *gauss_laguerre_rule(alpha, n));
    if (std::abs(current - previous) <= spec.rel_tol * std::abs(current)) return current;
    previous = current;
  }
  throw AccuracyError("gamma_expectation: Gauss-Laguerre did not converge within " +
                          std::to_string(spec.max_nodes) + " nodes",
                      previous);
}

MixtureRule log_gamma_rule(double shape) {
  if (!(shape > 0.0) || !std::isfinite(shape)) {
    fail(ErrorKind::kParameter, "log_gamma_rule: shape must be positive and finite");
  }
  static constexpr double kX[] = {0.1834346424956498, 0.5255324099163290, 0.7966664774136267,
                                  0.9602898564975363};
  static constexpr double kW[] = {0.3626837833783620, 0.3137066458778873, 0.2223810344533745,
                                  0.1012285362903763};
  const double t0 = std::log(shape);
  const double sigma = 1.0 / std::sqrt(shape);
  // Below t_lo the weight carries less than 1e-13 of the mass.
  const double t_lo = std::min(t0 - 8.0 * sigma, (std::log(1e-13) + std::lgamma(shape + 1.0)) / shape);
  const double t_hi = std::log(shape + 10.0 * std::sqrt(shape) + 40.0);
  const double width = std::min(1.0, sigma);
  const int panels = static_cast<int>(std::ceil((t_hi - t_lo) / width));
  const double h = (t_hi - t_lo) / panels;
  const double log_norm = std::lgamma(shape);
  MixtureRule rule;
  double total = 0.0;
  for (int p = 0; p < panels; ++p) {
    const double mid = t_lo + (p + 0.5) * h;
    for (int i = 0; i < 4; ++i) {
      for (double sign : {-1.0, 1.0}) {
        const double t = mid + sign * 0.5 * h * kX[i];
        const double z = std::exp(t);
        const double w = 0.5 * h * kW[i] * std::exp(shape * t - z - log_norm);
        if (w == 0.0) continue;
        rule.nodes.push_back(z);
        rule.weights.push_back(w);
        total += w;
      }
    }
  }
  for (double& w : rule.weights) w /= total;
  return rule;
}

double weighted_exp_integral(const Integrand& f, double shape, const QuadratureSpec& spec) {
  try {
    return std::exp(std::lgamma(shape)) * gamma_expectation(f, shape, spec);
  } catch (const AccuracyError& e) {
    throw AccuracyError(e.what(), std::exp(std::lgamma(shape)) * e.best_estimate());
  }
}

}  // namespace copula::numerics
