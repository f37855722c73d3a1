#pragma once

// The four analytic copula families and their evaluation on grids.

#include <string>
#include <variant>
#include <vector>

#include "copula/grid.hpp"
#include "json.hpp"

namespace copula::analytic {

struct GaussianModel {
  double c = 0.0;
};

struct CorrelationWeight {
  double c = 0.0;
  double weight = 0.0;
};

// Correlation-weighted mixture of Gaussian copulas.
struct CwgModel {
  std::vector<CorrelationWeight> entries;
};

struct KModel {
  double c = 0.0;
  double n = 1.0;
};

// gamma is shared by both components.
struct SkewedTModel {
  double c = 0.0;
  double nu = 4.0;
  double gamma = 0.0;
};

using CopulaModel = std::variant<GaussianModel, CwgModel, KModel, SkewedTModel>;

// Throws kParameter when an invariant is violated.
void validate(const CopulaModel& model);

// "gaussian", "cwg", "k", "skewed_t".
std::string model_tag(const CopulaModel& model);
nlohmann::json model_parameters(const CopulaModel& model);
CopulaModel model_from_json(const std::string& tag, const nlohmann::json& parameters);

// True when cop(u, v) = cop(1-u, 1-v) by construction.
bool point_symmetric(const CopulaModel& model);

double gaussian_density(double u, double v, double c);
double cwg_density(double u, double v, const std::vector<CorrelationWeight>& entries);
double k_copula_density(double u, double v, double c, double n);
double skewed_t_copula_density(double u, double v, double c, double nu, double gamma);
double density(const CopulaModel& model, double u, double v);

double k_marginal_pdf(double x, double n);
double k_marginal_cdf(double x, double n);
double k_marginal_quantile(double p, double n);
double skewed_t_marginal_pdf(double x, double nu, double gamma);
double skewed_t_marginal_cdf(double x, double nu, double gamma);
double skewed_t_marginal_quantile(double p, double nu, double gamma);

struct CopulaGrid {
  DensityGrid density;
  CopulaModel model;
};

enum class GridEvaluation {
  // Density at bin_center(i, B) x bin_center(j, B); each cell equals
  // density(model, u_i, v_j) bitwise.
  kBinCenter,
  // B^2 times the copula mass of the cell, from the joint distribution function
  // at the bin edges. Comparable with histogram cells at any B.
  kCellAverage,
};

std::string to_string(GridEvaluation mode);

CopulaGrid evaluate_grid(const CopulaModel& model, int bins,
                         GridEvaluation mode = GridEvaluation::kBinCenter);

}  // namespace copula::analytic
