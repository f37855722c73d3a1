#include "copula/fitting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "copula/errors.hpp"

namespace copula::fitting {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kInvPhi = 0.6180339887498949;  // (sqrt(5) - 1) / 2

struct Tracker {
  const DensityGrid& empirical;
  analytic::GridEvaluation mode;
  std::vector<LossPoint> curve;
  int evaluations = 0;

  double operator()(const analytic::CopulaModel& model, std::vector<double> params) {
    ++evaluations;
    double loss = kInf;
    try {
      loss = lms_loss(empirical, analytic::evaluate_grid(model, empirical.bins, mode).density);
    } catch (const Error&) {
      loss = kInf;
    }
    if (!std::isfinite(loss)) loss = kInf;
    curve.push_back({std::move(params), loss});
    return loss;
  }
};

struct Minimum {
  double x;
  double f;
};

// Golden-section search on [a, b] down to a bracket of width tol.
Minimum golden_section(const std::function<double(double)>& f, double a, double b, double tol) {
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c);
  double fd = f(d);
  Minimum best = fc <= fd ? Minimum{c, fc} : Minimum{d, fd};
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
      if (fc < best.f) best = {c, fc};
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
      if (fd < best.f) best = {d, fd};
    }
  }
  return best;
}

std::vector<double> log_spaced(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) {
    v[k] = k == n - 1 ? hi : std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * k / (n - 1));
  }
  v[0] = lo;
  return v;
}

std::vector<double> lin_spaced(double lo, double hi, int n) {
  std::vector<double> v(n);
  for (int k = 0; k < n; ++k) v[k] = k == n - 1 ? hi : lo + (hi - lo) * k / (n - 1);
  return v;
}

void check_correlation(double c) {
  if (!(c > -1.0 && c < 1.0)) {
    fail(ErrorKind::kParameter, "fit: correlation must lie in (-1, 1), got " + std::to_string(c));
  }
}

// Golden section on [lo, hi] around x0, starting from a bracket of half-width
// h and widening to the full range when the minimum lands on the bracket edge.
Minimum local_search(const std::function<double(double)>& f, double x0, double h, double lo,
                     double hi, double tol) {
  while (true) {
    const double a = std::max(lo, x0 - h);
    const double b = std::min(hi, x0 + h);
    const Minimum m = golden_section(f, a, b, tol);
    const bool at_edge = (m.x - a < 2.0 * tol && a > lo) || (b - m.x < 2.0 * tol && b < hi);
    if (!at_edge || (a <= lo && b >= hi)) return m;
    x0 = m.x;
    h *= 4.0;
  }
}

}  // namespace

double lms_loss(const DensityGrid& empirical, const DensityGrid& analytic,
                LossConvention convention) {
  if (empirical.bins != analytic.bins) {
    fail(ErrorKind::kParameter, "lms_loss: bin counts differ (" + std::to_string(empirical.bins) +
                                    " vs " + std::to_string(analytic.bins) + ")");
  }
  double sum = 0.0;
  for (std::size_t i = 0; i < empirical.cells.size(); ++i) {
    const double d = empirical.cells[i] - analytic.cells[i];
    sum += d * d;
  }
  if (convention == LossConvention::kMean) sum /= static_cast<double>(empirical.cells.size());
  return sum;
}

FitResult fit_k_copula(const DensityGrid& empirical, double c, const KFitOptions& options) {
  check_correlation(c);
  if (!(options.n_lo > 0.0 && options.n_hi > options.n_lo) || options.scan_points < 3) {
    fail(ErrorKind::kParameter, "fit_k_copula: invalid N range or scan size");
  }
  Tracker loss{empirical, options.grid_evaluation, {}, 0};
  const auto at = [&](double n) { return loss(analytic::KModel{c, n}, {n}); };

  const auto grid = log_spaced(options.n_lo, options.n_hi, options.scan_points);
  std::vector<double> scan(grid.size());
  for (std::size_t k = 0; k < grid.size(); ++k) scan[k] = at(grid[k]);
  const auto best_it = std::min_element(scan.begin(), scan.end());
  if (!std::isfinite(*best_it)) fail(ErrorKind::kFitFailure, "fit_k_copula: no finite loss on the scan");
  const std::size_t k = static_cast<std::size_t>(best_it - scan.begin());

  const double a = grid[k == 0 ? 0 : k - 1];
  const double b = grid[std::min(k + 1, grid.size() - 1)];
  const double tol = std::min(options.refine_tol, options.n_tol);
  Minimum m = golden_section(at, a, b, tol);
  if (*best_it < m.f) m = {grid[k], *best_it};

  FitResult result;
  result.model = analytic::KModel{c, m.x};
  result.loss = m.f;
  result.evaluations = loss.evaluations;
  result.converged = std::isfinite(m.f);
  result.loss_curve = std::move(loss.curve);
  return result;
}

FitResult fit_skewed_t(const DensityGrid& empirical, double c, const SkewedTFitOptions& options) {
  check_correlation(c);
  if (!(options.nu_lo > 2.0 && options.nu_hi > options.nu_lo) ||
      !(options.gamma_hi > options.gamma_lo) || options.scan_points < 3) {
    fail(ErrorKind::kParameter, "fit_skewed_t: invalid parameter ranges or scan size");
  }
  Tracker loss{empirical, options.grid_evaluation, {}, 0};
  const auto at = [&](double nu, double g) {
    return loss(analytic::SkewedTModel{c, nu, g}, {nu, g});
  };

  const auto nus = log_spaced(options.nu_lo, options.nu_hi, options.scan_points);
  const auto gammas = lin_spaced(options.gamma_lo, options.gamma_hi, options.scan_points);
  std::size_t bi = 0;
  std::size_t bj = 0;
  double best = kInf;
  for (std::size_t i = 0; i < nus.size(); ++i) {
    for (std::size_t j = 0; j < gammas.size(); ++j) {
      const double f = at(nus[i], gammas[j]);
      if (f < best) {
        best = f;
        bi = i;
        bj = j;
      }
    }
  }
  if (!std::isfinite(best)) fail(ErrorKind::kFitFailure, "fit_skewed_t: no finite loss on the scan");

  // Coordinate descent inside the scan cell neighbourhood.
  const double nu_lo = nus[bi == 0 ? 0 : bi - 1];
  const double nu_hi = nus[std::min(bi + 1, nus.size() - 1)];
  const double g_lo = gammas[bj == 0 ? 0 : bj - 1];
  const double g_hi = gammas[std::min(bj + 1, gammas.size() - 1)];
  const double nu_tol = std::min(options.refine_tol, options.nu_tol);
  const double g_tol = std::min(options.refine_tol, options.gamma_tol);

  double nu = nus[bi];
  double g = gammas[bj];
  double f = best;
  double h_nu = nu_hi - nu_lo;
  double h_g = g_hi - g_lo;
  bool converged = false;
  for (int sweep = 0; sweep < options.max_sweeps; ++sweep) {
    const double nu_prev = nu;
    const double g_prev = g;
    const Minimum mn = local_search([&](double x) { return at(x, g); }, nu, h_nu, nu_lo, nu_hi, nu_tol);
    if (mn.f < f) {
      nu = mn.x;
      f = mn.f;
    }
    const Minimum mg = local_search([&](double x) { return at(nu, x); }, g, h_g, g_lo, g_hi, g_tol);
    if (mg.f < f) {
      g = mg.x;
      f = mg.f;
    }
    const double d_nu = std::abs(nu - nu_prev);
    const double d_g = std::abs(g - g_prev);
    h_nu = std::max(4.0 * d_nu, 10.0 * nu_tol);
    h_g = std::max(4.0 * d_g, 10.0 * g_tol);
    if (d_nu <= nu_tol && d_g <= g_tol) {
      converged = true;
      break;
    }
  }

  FitResult result;
  result.model = analytic::SkewedTModel{c, nu, g};
  result.loss = f;
  result.evaluations = loss.evaluations;
  result.converged = converged;
  result.loss_curve = std::move(loss.curve);
  return result;
}

std::vector<ComparisonRow> model_comparison(const empirical::CopulaHistogram& empirical,
                                            const market_data::CorrelationSet& corrs,
                                            const ComparisonOptions& options) {
  if (options.models.empty()) fail(ErrorKind::kParameter, "model comparison: empty model list");
  if (corrs.pairs.empty()) fail(ErrorKind::kInsufficientData, "model comparison: no correlations");
  const DensityGrid& emp = empirical.density;
  const double c_bar = std::clamp(corrs.mean_correlation, -kMaxCorrelation, kMaxCorrelation);

  std::vector<ComparisonRow> rows;
  for (const auto& name : options.models) {
    ComparisonRow row;
    row.name = name;
    if (name == "gaussian") {
      row.model = analytic::GaussianModel{c_bar};
    } else if (name == "cwg") {
      const auto h = empirical::correlation_histogram(corrs, options.correlation_bin_width);
      analytic::CwgModel cwg;
      for (std::size_t k = 0; k < h.centers.size(); ++k) {
        cwg.entries.push_back(
            {std::clamp(h.centers[k], -kMaxCorrelation, kMaxCorrelation), h.weights[k]});
      }
      row.model = cwg;
    } else if (name == "k") {
      row.fit = fit_k_copula(emp, c_bar, options.k);
      row.model = row.fit->model;
    } else if (name == "skewed_t") {
      row.fit = fit_skewed_t(emp, c_bar, options.skewed_t);
      row.model = row.fit->model;
    } else {
      fail(ErrorKind::kParameter, "model comparison: unknown model '" + name + "'");
    }
    const DensityGrid analytic_grid = analytic::evaluate_grid(row.model, emp.bins, options.grid_evaluation).density;
    row.loss_sum = lms_loss(emp, analytic_grid, LossConvention::kSum);
    row.loss_mean = lms_loss(emp, analytic_grid, LossConvention::kMean);
    row.difference = DensityGrid(emp.bins);
    for (std::size_t i = 0; i < emp.cells.size(); ++i) {
      row.difference.cells[i] = emp.cells[i] - analytic_grid.cells[i];
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace copula::fitting
