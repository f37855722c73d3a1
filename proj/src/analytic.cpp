#include "copula/analytic.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>

#include "copula/errors.hpp"
#include "copula/marginals.hpp"
#include "copula/numerics.hpp"

namespace copula::analytic {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void check_correlation(double c, const char* family) {
  if (!(c > -1.0 && c < 1.0)) {
    fail(ErrorKind::kParameter,
         std::string(family) + ": correlation must lie in (-1, 1), got " + std::to_string(c));
  }
}

void check_unit(double u, const char* name) {
  if (!(u > 0.0 && u < 1.0)) {
    fail(ErrorKind::kInvalidInput,
         std::string("copula density: ") + name + " must lie in (0, 1), got " + std::to_string(u));
  }
}

double gaussian_log_density_xy(double x, double y, double c) {
  const double one_minus_c2 = 1.0 - c * c;
  return -0.5 * std::log(one_minus_c2) -
         (c * c * (x * x + y * y) - 2.0 * c * (x * y)) / (2.0 * one_minus_c2);
}

// A family reduced to: a marginal quantile, the marginal log density at the
// quantile, and the density of the copula given both quantiles.
struct Evaluator {
  std::function<double(double)> quantile;
  std::function<double(double)> log_marginal;
  std::function<double(double, double, double, double)> cell;  // (x, y, lfx, lfy)
};

double ratio(double log_joint, double lfx, double lfy) {
  const double value = std::exp(log_joint - (lfx + lfy));
  if (std::isnan(value)) {
    fail(ErrorKind::kDomain, "copula density undefined at this point (singular margin)");
  }
  return value;
}

Evaluator make_evaluator(const CopulaModel& model) {
  validate(model);
  return std::visit(
      Overloaded{
          [](const GaussianModel& m) {
            const double c = m.c;
            return Evaluator{numerics::std_normal_quantile, [](double) { return 0.0; },
                             [c](double x, double y, double, double) {
                               return std::exp(gaussian_log_density_xy(x, y, c));
                             }};
          },
          [](const CwgModel& m) {
            const auto entries = m.entries;
            return Evaluator{numerics::std_normal_quantile, [](double) { return 0.0; },
                             [entries](double x, double y, double, double) {
                               double sum = 0.0;
                               for (const auto& e : entries) {
                                 sum += e.weight * std::exp(gaussian_log_density_xy(x, y, e.c));
                               }
                               return sum;
                             }};
          },
          [](const KModel& m) {
            const marginals::KMarginal margin(m.n);
            const double c = m.c;
            const double n = m.n;
            return Evaluator{[margin](double p) { return margin.quantile(p); },
                             [margin](double x) { return margin.log_pdf(x); },
                             [c, n](double x, double y, double lfx, double lfy) {
                               return ratio(marginals::k_joint_log_pdf(x, y, c, n), lfx, lfy);
                             }};
          },
          [](const SkewedTModel& m) {
            const marginals::SkewedTMarginal margin(m.nu, m.gamma);
            const double c = m.c;
            const double nu = m.nu;
            const double g = margin.symmetric() ? 0.0 : m.gamma;
            return Evaluator{
                [margin](double p) { return margin.quantile(p); },
                [margin](double x) { return margin.log_pdf(x); },
                [c, nu, g](double x, double y, double lfx, double lfy) {
                  return ratio(marginals::skewed_t_joint_log_pdf(x, y, c, nu, g), lfx, lfy);
                }};
          },
      },
      model);
}

// Joint distribution function at the quantiles of the interior bin edges,
// G[i][j] = C(i / B, j / B) for 1 <= i, j < B.
struct EdgeCdf {
  std::function<double(double)> quantile;
  std::function<double(double, double)> joint;  // F(x, y), symmetric in x, y
};

EdgeCdf make_edge_cdf(const CopulaModel& model) {
  validate(model);
  using numerics::bivariate_normal_cdf;
  return std::visit(
      Overloaded{
          [](const GaussianModel& m) {
            const double c = m.c;
            return EdgeCdf{numerics::std_normal_quantile,
                           [c](double x, double y) { return bivariate_normal_cdf(x, y, c); }};
          },
          [](const CwgModel& m) {
            const auto entries = m.entries;
            return EdgeCdf{numerics::std_normal_quantile, [entries](double x, double y) {
                             double sum = 0.0;
                             for (const auto& e : entries) {
                               sum += e.weight * bivariate_normal_cdf(x, y, e.c);
                             }
                             return sum;
                           }};
          },
          [](const KModel& m) {
            const marginals::KMarginal margin(m.n);
            const auto rule = numerics::log_gamma_rule(0.5 * m.n);
            std::vector<double> scale(rule.nodes.size());
            for (std::size_t q = 0; q < scale.size(); ++q) {
              scale[q] = std::sqrt(m.n / (2.0 * rule.nodes[q]));
            }
            const double c = m.c;
            return EdgeCdf{[margin](double p) { return margin.quantile(p); },
                           [rule, scale, c](double x, double y) {
                             double sum = 0.0;
                             for (std::size_t q = 0; q < scale.size(); ++q) {
                               sum += rule.weights[q] *
                                      bivariate_normal_cdf(scale[q] * x, scale[q] * y, c);
                             }
                             return sum;
                           }};
          },
          [](const SkewedTModel& m) {
            const marginals::SkewedTMarginal margin(m.nu, m.gamma);
            const double g = margin.symmetric() ? 0.0 : m.gamma;
            const auto rule = numerics::log_gamma_rule(0.5 * m.nu);
            std::vector<double> w(rule.nodes.size());
            for (std::size_t q = 0; q < w.size(); ++q) w[q] = m.nu / (2.0 * rule.nodes[q]);
            const double c = m.c;
            return EdgeCdf{[margin](double p) { return margin.quantile(p); },
                           [rule, w, c, g](double x, double y) {
                             double sum = 0.0;
                             for (std::size_t q = 0; q < w.size(); ++q) {
                               const double root = std::sqrt(w[q]);
                               const double shift = g * w[q];
                               sum += rule.weights[q] *
                                      bivariate_normal_cdf((x - shift) / root, (y - shift) / root, c);
                             }
                             return sum;
                           }};
          },
      },
      model);
}

DensityGrid cell_average_grid(const CopulaModel& model, int bins) {
  const EdgeCdf ev = make_edge_cdf(model);
  const auto b = static_cast<std::size_t>(bins);
  std::vector<double> edge(b + 1);
  std::vector<double> xs(b + 1);
  for (std::size_t j = 1; j < b; ++j) {
    edge[j] = static_cast<double>(j) / bins;
    xs[j] = ev.quantile(edge[j]);
  }
  edge[b] = 1.0;
  std::vector<double> g((b + 1) * (b + 1), 0.0);
  const auto at = [&](std::size_t i, std::size_t j) -> double& { return g[i * (b + 1) + j]; };
  for (std::size_t i = 1; i < b; ++i) {
    for (std::size_t j = i; j < b; ++j) at(i, j) = at(j, i) = ev.joint(xs[i], xs[j]);
  }
  for (std::size_t j = 1; j <= b; ++j) at(b, j) = at(j, b) = edge[j];
  DensityGrid grid(bins);
  const double area = static_cast<double>(bins) * bins;
  for (std::size_t i = 0; i < b; ++i) {
    for (std::size_t j = 0; j < b; ++j) {
      const double mass = at(i + 1, j + 1) - at(i, j + 1) - at(i + 1, j) + at(i, j);
      grid.cells[i * b + j] = std::max(0.0, area * mass);
    }
  }
  if (point_symmetric(model)) {
    for (std::size_t i = 0; i < b; ++i) {
      for (std::size_t j = 0; j < b; ++j) {
        const std::size_t k = i * b + j;
        const std::size_t r = (b - 1 - i) * b + (b - 1 - j);
        if (k < r) grid.cells[k] = grid.cells[r] = 0.5 * (grid.cells[k] + grid.cells[r]);
      }
    }
  }
  return grid;
}

double evaluate_point(const Evaluator& ev, double u, double v) {
  check_unit(u, "u");
  check_unit(v, "v");
  const double x = ev.quantile(u);
  const double y = ev.quantile(v);
  return ev.cell(x, y, ev.log_marginal(x), ev.log_marginal(y));
}

}  // namespace

void validate(const CopulaModel& model) {
  std::visit(Overloaded{
                 [](const GaussianModel& m) { check_correlation(m.c, "Gaussian copula"); },
                 [](const CwgModel& m) {
                   if (m.entries.empty()) {
                     fail(ErrorKind::kParameter, "CWG copula: at least one entry required");
                   }
                   double total = 0.0;
                   for (const auto& e : m.entries) {
                     check_correlation(e.c, "CWG copula");
                     if (!(e.weight >= 0.0) || !std::isfinite(e.weight)) {
                       fail(ErrorKind::kParameter, "CWG copula: weights must be non-negative");
                     }
                     total += e.weight;
                   }
                   if (std::abs(total - 1.0) > 1e-12) {
                     fail(ErrorKind::kParameter,
                          "CWG copula: weights must sum to 1, got " + std::to_string(total));
                   }
                 },
                 [](const KModel& m) {
                   check_correlation(m.c, "K copula");
                   if (!(m.n > 0.0) || !std::isfinite(m.n)) {
                     fail(ErrorKind::kParameter, "K copula: N must be positive");
                   }
                 },
                 [](const SkewedTModel& m) {
                   check_correlation(m.c, "skewed t copula");
                   if (!(m.nu > 2.0) || !std::isfinite(m.nu)) {
                     fail(ErrorKind::kParameter, "skewed t copula: nu must exceed 2");
                   }
                   if (!std::isfinite(m.gamma)) {
                     fail(ErrorKind::kParameter, "skewed t copula: gamma must be finite");
                   }
                 },
             },
             model);
}

std::string model_tag(const CopulaModel& model) {
  return std::visit(Overloaded{[](const GaussianModel&) { return std::string("gaussian"); },
                               [](const CwgModel&) { return std::string("cwg"); },
                               [](const KModel&) { return std::string("k"); },
                               [](const SkewedTModel&) { return std::string("skewed_t"); }},
                    model);
}

nlohmann::json model_parameters(const CopulaModel& model) {
  return std::visit(Overloaded{
                        [](const GaussianModel& m) { return nlohmann::json{{"c", m.c}}; },
                        [](const CwgModel& m) {
                          nlohmann::json entries = nlohmann::json::array();
                          for (const auto& e : m.entries) {
                            entries.push_back({{"c", e.c}, {"weight", e.weight}});
                          }
                          return nlohmann::json{{"entries", entries}};
                        },
                        [](const KModel& m) { return nlohmann::json{{"c", m.c}, {"N", m.n}}; },
                        [](const SkewedTModel& m) {
                          return nlohmann::json{{"c", m.c}, {"nu", m.nu}, {"gamma", m.gamma}};
                        },
                    },
                    model);
}

CopulaModel model_from_json(const std::string& tag, const nlohmann::json& parameters) {
  auto number = [&](const char* key) {
    if (!parameters.contains(key) || !parameters.at(key).is_number()) {
      fail(ErrorKind::kInvalidInput, "model '" + tag + "': numeric parameter '" + key + "' missing");
    }
    return parameters.at(key).get<double>();
  };
  CopulaModel model;
  if (tag == "gaussian") {
    model = GaussianModel{number("c")};
  } else if (tag == "cwg") {
    if (!parameters.contains("entries") || !parameters.at("entries").is_array()) {
      fail(ErrorKind::kInvalidInput, "model 'cwg': 'entries' array missing");
    }
    CwgModel cwg;
    for (const auto& e : parameters.at("entries")) {
      cwg.entries.push_back({e.at("c").get<double>(), e.at("weight").get<double>()});
    }
    model = cwg;
  } else if (tag == "k") {
    model = KModel{number("c"), number("N")};
  } else if (tag == "skewed_t") {
    model = SkewedTModel{number("c"), number("nu"), number("gamma")};
  } else {
    fail(ErrorKind::kInvalidInput, "unknown model '" + tag + "'");
  }
  validate(model);
  return model;
}

bool point_symmetric(const CopulaModel& model) {
  if (const auto* t = std::get_if<SkewedTModel>(&model)) {
    return std::abs(t->gamma) < marginals::kSymmetricGammaThreshold;
  }
  return true;
}

double gaussian_density(double u, double v, double c) {
  return density(GaussianModel{c}, u, v);
}

double cwg_density(double u, double v, const std::vector<CorrelationWeight>& entries) {
  return density(CwgModel{entries}, u, v);
}

double k_copula_density(double u, double v, double c, double n) {
  return density(KModel{c, n}, u, v);
}

double skewed_t_copula_density(double u, double v, double c, double nu, double gamma) {
  return density(SkewedTModel{c, nu, gamma}, u, v);
}

double density(const CopulaModel& model, double u, double v) {
  return evaluate_point(make_evaluator(model), u, v);
}

double k_marginal_pdf(double x, double n) { return marginals::KMarginal(n).pdf(x); }
double k_marginal_cdf(double x, double n) { return marginals::KMarginal(n).cdf(x); }
double k_marginal_quantile(double p, double n) { return marginals::KMarginal(n).quantile(p); }

double skewed_t_marginal_pdf(double x, double nu, double gamma) {
  return marginals::SkewedTMarginal(nu, gamma).pdf(x);
}
double skewed_t_marginal_cdf(double x, double nu, double gamma) {
  return marginals::SkewedTMarginal(nu, gamma).cdf(x);
}
double skewed_t_marginal_quantile(double p, double nu, double gamma) {
  return marginals::SkewedTMarginal(nu, gamma).quantile(p);
}

std::string to_string(GridEvaluation mode) {
  return mode == GridEvaluation::kBinCenter ? "bin_center" : "cell_average";
}

CopulaGrid evaluate_grid(const CopulaModel& model, int bins, GridEvaluation mode) {
  if (bins < 2) fail(ErrorKind::kParameter, "evaluate_grid: bins must be >= 2");
  if (mode == GridEvaluation::kCellAverage) return {cell_average_grid(model, bins), model};
  const Evaluator ev = make_evaluator(model);
  std::vector<double> xs(bins);
  std::vector<double> lf(bins);
  for (int j = 0; j < bins; ++j) {
    xs[j] = ev.quantile(bin_center(j, bins));
    lf[j] = ev.log_marginal(xs[j]);
  }
  CopulaGrid grid{DensityGrid(bins), model};
  for (int i = 0; i < bins; ++i) {
    for (int j = 0; j < bins; ++j) grid.density(i, j) = ev.cell(xs[i], xs[j], lf[i], lf[j]);
  }
  return grid;
}

}  // namespace copula::analytic
