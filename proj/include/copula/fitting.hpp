#pragma once

// Least-squares comparison of analytic grids with empirical histograms and
// one- and two-parameter fits at fixed correlation.

#include <optional>
#include <string>
#include <vector>

#include "copula/analytic.hpp"
#include "copula/empirical.hpp"
#include "copula/grid.hpp"
#include "copula/market_data.hpp"

namespace copula::fitting {

enum class LossConvention {
  kSum,   // sum over cells of squared differences
  kMean,  // the same divided by B^2
};

double lms_loss(const DensityGrid& empirical, const DensityGrid& analytic,
                LossConvention convention = LossConvention::kSum);

struct LossPoint {
  std::vector<double> parameters;
  double loss = 0.0;
};

struct FitResult {
  analytic::CopulaModel model;
  double loss = 0.0;
  int evaluations = 0;
  bool converged = false;
  std::vector<LossPoint> loss_curve;  // every evaluation, in order
};

struct KFitOptions {
  double n_lo = 1.0;
  double n_hi = 100.0;
  int scan_points = 16;  // log-spaced
  double n_tol = 0.05;   // bracket width that counts as converged
  // Refinement continues to this bracket width.
  double refine_tol = 1e-7;
  analytic::GridEvaluation grid_evaluation = analytic::GridEvaluation::kCellAverage;
};

struct SkewedTFitOptions {
  double nu_lo = 2.1;
  double nu_hi = 100.0;
  double gamma_lo = -0.5;
  double gamma_hi = 0.5;
  int scan_points = 16;  // nu log-spaced, gamma linear
  double nu_tol = 0.05;
  double gamma_tol = 0.005;
  double refine_tol = 1e-7;
  int max_sweeps = 60;
  analytic::GridEvaluation grid_evaluation = analytic::GridEvaluation::kCellAverage;
};

FitResult fit_k_copula(const DensityGrid& empirical, double c, const KFitOptions& options = {});
FitResult fit_skewed_t(const DensityGrid& empirical, double c,
                       const SkewedTFitOptions& options = {});

struct ComparisonRow {
  std::string name;  // model tag
  analytic::CopulaModel model;
  double loss_sum = 0.0;
  double loss_mean = 0.0;
  DensityGrid difference;  // empirical - analytic
  std::optional<FitResult> fit;
};

struct ComparisonOptions {
  std::vector<std::string> models{"gaussian", "cwg", "k", "skewed_t"};
  double correlation_bin_width = 0.02;
  // Used for the reported losses; the fits use their own setting.
  analytic::GridEvaluation grid_evaluation = analytic::GridEvaluation::kCellAverage;
  KFitOptions k;
  SkewedTFitOptions skewed_t;
};

// Correlations are clipped to +-kMaxCorrelation before entering a model.
inline constexpr double kMaxCorrelation = 0.999;

std::vector<ComparisonRow> model_comparison(const empirical::CopulaHistogram& empirical,
                                            const market_data::CorrelationSet& corrs,
                                            const ComparisonOptions& options = {});

}  // namespace copula::fitting
