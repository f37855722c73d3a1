// copula: command line front end for the return, histogram, fitting and
// sampling pipeline.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "copula/analytic.hpp"
#include "copula/empirical.hpp"
#include "copula/errors.hpp"
#include "copula/fitting.hpp"
#include "copula/grid_io.hpp"
#include "copula/market_data.hpp"
#include "copula/sampling.hpp"
#include "copula/text.hpp"
#include "json.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace copula;

namespace {

constexpr int kExitInput = 2;
constexpr int kExitNumerical = 3;

struct ModelArgs {
  std::string family = "gaussian";
  double c = 0.0;
  double n = 5.0;
  double nu = 4.0;
  double gamma = 0.0;
};

struct Config {
  std::string input;
  std::string output;
  std::string output_dir = ".";
  std::string normalization = "both";
  int window = 13;
  std::string alignment = "include_current";
  double max_missing = 0.01;
  int bins = 20;
  std::string loss = "sum";
  std::string grid_evaluation = "cell_average";
  std::vector<std::string> models{"gaussian", "cwg", "k", "skewed_t"};
  std::vector<double> n_range{1.0, 100.0};
  std::vector<double> nu_range{2.1, 100.0};
  std::vector<double> gamma_range{-0.5, 0.5};
  int scan_points = 16;
  double correlation_bin_width = 0.02;
  double asymmetry_bin_width = 0.01;
  std::uint64_t seed = 1;
  std::uint64_t stream = 0;
  std::size_t length = 100000;
  std::string method = "gamma_mixture";
  std::string format = "prices";
  std::string first;
  std::string second;
  ModelArgs model;
};

std::ifstream open_in(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::kIo, "cannot open '" + path + "' for reading");
  return in;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIo, "cannot open '" + path.string() + "' for writing");
  return out;
}

void check_bins(int bins) {
  if (bins < 5 || bins % 5 != 0) {
    fail(ErrorKind::kParameter,
         "bins must be a positive multiple of 5 so that 0.2 and 0.8 fall on bin edges, got " +
             std::to_string(bins));
  }
}

void check_window(int window) {
  if (window < 2) fail(ErrorKind::kParameter, "window must be >= 2");
}

market_data::WindowAlignment parse_alignment(const std::string& s) {
  if (s == "include_current") return market_data::WindowAlignment::kIncludeCurrent;
  if (s == "strictly_preceding") return market_data::WindowAlignment::kStrictlyPreceding;
  fail(ErrorKind::kParameter, "unknown window alignment '" + s + "'");
}

analytic::GridEvaluation parse_evaluation(const std::string& s) {
  if (s == "cell_average") return analytic::GridEvaluation::kCellAverage;
  if (s == "bin_center") return analytic::GridEvaluation::kBinCenter;
  fail(ErrorKind::kParameter, "unknown grid evaluation '" + s + "'");
}

std::vector<double> check_range(const std::vector<double>& r, const char* name) {
  if (r.size() != 2 || !(r[0] < r[1])) {
    fail(ErrorKind::kParameter, std::string(name) + " must be two increasing values");
  }
  return r;
}

analytic::CopulaModel build_model(const ModelArgs& m) {
  analytic::CopulaModel model;
  if (m.family == "gaussian") {
    model = analytic::GaussianModel{m.c};
  } else if (m.family == "k") {
    model = analytic::KModel{m.c, m.n};
  } else if (m.family == "skewed_t") {
    model = analytic::SkewedTModel{m.c, m.nu, m.gamma};
  } else {
    fail(ErrorKind::kParameter, "unknown model '" + m.family + "' (gaussian, k, skewed_t)");
  }
  analytic::validate(model);
  return model;
}

std::string iso_date(int offset) {
  using namespace std::chrono;
  const year_month_day d{sys_days{year{2000} / January / 3} + days{offset}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(d.year()),
                static_cast<unsigned>(d.month()), static_cast<unsigned>(d.day()));
  return buf;
}

void write_value_histogram(const fs::path& path, const empirical::ValueHistogram& h) {
  auto out = open_out(path);
  out << "center,count,weight\n";
  for (std::size_t k = 0; k < h.centers.size(); ++k) {
    out << text::format_number(h.centers[k]) << ',' << h.counts[k] << ','
        << text::format_number(h.weights[k]) << '\n';
  }
}

void write_json(const fs::path& path, const json& j) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
}

json corner_json(const empirical::TailAsymmetry& ta) {
  return {{"p", ta.p},
          {"q", ta.q},
          {"lower_lower", ta.corner_mass.lower_lower},
          {"lower_upper", ta.corner_mass.lower_upper},
          {"upper_lower", ta.corner_mass.upper_lower},
          {"upper_upper", ta.corner_mass.upper_upper}};
}

market_data::ReturnMatrix load_returns(const std::string& path) {
  auto in = open_in(path);
  return market_data::read_return_matrix(in);
}

void cmd_returns(const Config& cfg) {
  check_window(cfg.window);
  if (cfg.normalization != "original" && cfg.normalization != "local" &&
      cfg.normalization != "both") {
    fail(ErrorKind::kParameter, "normalization must be original, local or both");
  }
  const auto alignment = parse_alignment(cfg.alignment);
  auto in = open_in(cfg.input);
  const auto panel = market_data::align_prices(market_data::read_prices_csv(in), cfg.max_missing);
  for (const auto& w : panel.warnings) std::cerr << "warning: " << w << '\n';
  const auto original = market_data::original_returns(panel);
  const fs::path dir(cfg.output_dir);
  json summary{{"tickers", original.cols()}, {"rows", original.rows()}, {"files", json::array()}};
  if (cfg.normalization != "local") {
    auto out = open_out(dir / "original_returns.csv");
    market_data::write_return_matrix(out, original);
    summary["files"].push_back((dir / "original_returns.csv").string());
  }
  if (cfg.normalization != "original") {
    const auto local = market_data::locally_normalized_returns(original, cfg.window, alignment);
    for (const auto& w : market_data::diagnose(local)) std::cerr << "warning: " << w << '\n';
    auto out = open_out(dir / "local_returns.csv");
    market_data::write_return_matrix(out, local);
    summary["files"].push_back((dir / "local_returns.csv").string());
  }
  std::cout << summary.dump() << '\n';
}

void cmd_empcop(const Config& cfg) {
  check_bins(cfg.bins);
  const auto matrix = load_returns(cfg.input);
  const auto hist = empirical::averaged_copula(matrix, cfg.bins);
  const fs::path dir(cfg.output_dir);
  const std::string kind = market_data::to_string(matrix.kind);
  grid_io::save_grid(dir / "empirical_copula.csv", hist.density,
                     grid_io::make_sidecar(cfg.bins, "empirical_" + kind, "", json::object(),
                                           hist.sample_count, hist.pair_count));
  const auto asym = empirical::asymmetry_histograms(matrix, cfg.bins, cfg.asymmetry_bin_width);
  write_value_histogram(dir / "asymmetry_p.csv", asym.p);
  write_value_histogram(dir / "asymmetry_q.csv", asym.q);
  {
    auto out = open_out(dir / "asymmetry_pairs.csv");
    out << "ticker_k,ticker_l,p,q\n";
    for (const auto& pa : asym.pairs) {
      out << matrix.tickers[pa.k] << ',' << matrix.tickers[pa.l] << ','
          << text::format_number(pa.asymmetry.p) << ',' << text::format_number(pa.asymmetry.q)
          << '\n';
    }
  }
  const auto corrs = market_data::correlation_set(matrix);
  write_value_histogram(dir / "correlations.csv",
                        empirical::correlation_histogram(corrs, cfg.correlation_bin_width));
  json summary{{"bins", cfg.bins},
               {"kind", kind},
               {"sample_count", hist.sample_count},
               {"pair_count", hist.pair_count},
               {"mean_correlation", corrs.mean_correlation},
               {"averaged_asymmetry", corner_json(empirical::tail_asymmetry(hist.density))}};
  std::cout << summary.dump() << '\n';
}

void cmd_asym(const Config& cfg) {
  const auto file = grid_io::load_grid(cfg.input);
  std::cout << corner_json(empirical::tail_asymmetry(file.grid)).dump() << '\n';
}

void cmd_fit(const Config& cfg) {
  check_bins(cfg.bins);
  if (cfg.loss != "sum" && cfg.loss != "mean") fail(ErrorKind::kParameter, "loss must be sum or mean");
  const auto matrix = load_returns(cfg.input);
  const auto hist = empirical::averaged_copula(matrix, cfg.bins);
  const auto corrs = market_data::correlation_set(matrix);

  fitting::ComparisonOptions options;
  options.models = cfg.models;
  options.correlation_bin_width = cfg.correlation_bin_width;
  options.grid_evaluation = parse_evaluation(cfg.grid_evaluation);
  const auto n = check_range(cfg.n_range, "n-range");
  const auto nu = check_range(cfg.nu_range, "nu-range");
  const auto g = check_range(cfg.gamma_range, "gamma-range");
  options.k.n_lo = n[0];
  options.k.n_hi = n[1];
  options.k.scan_points = cfg.scan_points;
  options.k.grid_evaluation = options.grid_evaluation;
  options.skewed_t.nu_lo = nu[0];
  options.skewed_t.nu_hi = nu[1];
  options.skewed_t.gamma_lo = g[0];
  options.skewed_t.gamma_hi = g[1];
  options.skewed_t.scan_points = cfg.scan_points;
  options.skewed_t.grid_evaluation = options.grid_evaluation;

  const auto rows = fitting::model_comparison(hist, corrs, options);
  const fs::path dir(cfg.output_dir);
  const std::string kind = market_data::to_string(matrix.kind);
  grid_io::save_grid(dir / "empirical_copula.csv", hist.density,
                     grid_io::make_sidecar(cfg.bins, "empirical_" + kind, "", json::object(),
                                           hist.sample_count, hist.pair_count));
  json table = json::array();
  auto csv = open_out(dir / "comparison.csv");
  csv << "model,loss,loss_sum,loss_mean,parameters\n";
  for (const auto& row : rows) {
    const json params = analytic::model_parameters(row.model);
    const double loss = cfg.loss == "sum" ? row.loss_sum : row.loss_mean;
    json entry{{"model", row.name},
               {"parameters", params},
               {"loss", loss},
               {"loss_sum", row.loss_sum},
               {"loss_mean", row.loss_mean}};
    if (row.fit) {
      entry["evaluations"] = row.fit->evaluations;
      entry["converged"] = row.fit->converged;
      auto out = open_out(dir / ("loss_curve_" + row.name + ".csv"));
      out << "parameters,loss\n";
      for (const auto& p : row.fit->loss_curve) {
        std::string ps;
        for (std::size_t k = 0; k < p.parameters.size(); ++k) {
          if (k > 0) ps += ' ';
          ps += text::format_number(p.parameters[k]);
        }
        out << ps << ',' << text::format_number(p.loss) << '\n';
      }
    }
    table.push_back(entry);
    std::string pstr = params.dump();
    for (auto& ch : pstr) {
      if (ch == ',') ch = ';';
    }
    csv << row.name << ',' << text::format_number(loss) << ',' << text::format_number(row.loss_sum)
        << ',' << text::format_number(row.loss_mean) << ',' << pstr << '\n';
    grid_io::save_grid(dir / ("difference_" + row.name + ".csv"), row.difference,
                       grid_io::make_sidecar(cfg.bins, "difference", row.name, params,
                                             hist.sample_count, hist.pair_count));
    grid_io::save_grid(
        dir / ("analytic_" + row.name + ".csv"),
        analytic::evaluate_grid(row.model, cfg.bins, options.grid_evaluation).density,
        grid_io::make_sidecar(cfg.bins, "analytic_" + analytic::to_string(options.grid_evaluation),
                              row.name, params, 0, 0));
  }
  json summary{{"bins", cfg.bins},
               {"kind", kind},
               {"loss_convention", cfg.loss},
               {"grid_evaluation", analytic::to_string(options.grid_evaluation)},
               {"mean_correlation", corrs.mean_correlation},
               {"models", table}};
  write_json(dir / "comparison.json", summary);
  std::cout << summary.dump() << '\n';
}

void cmd_sample(const Config& cfg) {
  if (cfg.length < 2) fail(ErrorKind::kParameter, "length must be >= 2");
  if (cfg.format != "prices" && cfg.format != "returns") {
    fail(ErrorKind::kParameter, "format must be prices or returns");
  }
  if (cfg.output.empty()) fail(ErrorKind::kParameter, "--output is required");
  sampling::Rng rng({cfg.seed, cfg.stream});
  const auto& m = cfg.model;
  sampling::PairSample s;
  if (m.family == "gaussian") {
    s = sampling::sample_bivariate_gaussian(m.c, cfg.length, rng);
  } else if (m.family == "k") {
    sampling::KMethod method;
    if (cfg.method == "gamma_mixture") {
      method = sampling::KMethod::kGammaMixture;
    } else if (cfg.method == "wishart") {
      method = sampling::KMethod::kWishart;
    } else {
      fail(ErrorKind::kParameter, "method must be gamma_mixture or wishart");
    }
    s = sampling::sample_k_bivariate(m.c, m.n, cfg.length, rng, method);
  } else if (m.family == "skewed_t") {
    s = sampling::sample_skewed_t_bivariate(m.c, m.nu, m.gamma, cfg.length, rng);
  } else {
    fail(ErrorKind::kParameter, "unknown model '" + m.family + "' (gaussian, k, skewed_t)");
  }
  if (cfg.format == "prices") {
    double lx = std::log(100.0);
    double ly = lx;
    for (std::size_t t = 0; t < cfg.length; ++t) {
      lx += 0.01 * s.x[t];
      ly += 0.01 * s.y[t];
      if (std::abs(lx) > 700.0 || std::abs(ly) > 700.0) {
        fail(ErrorKind::kParameter, "sample: prices leave the double range after " + std::to_string(t + 1) +
                                        " steps; use --format returns");
      }
    }
  }
  auto out = open_out(cfg.output);
  if (cfg.format == "returns") {
    market_data::ReturnMatrix matrix;
    matrix.tickers = {"SYN001", "SYN002"};
    for (std::size_t t = 0; t < cfg.length; ++t) matrix.dates.push_back(iso_date(static_cast<int>(t) + 1));
    matrix.columns = {s.x, s.y};
    market_data::write_return_matrix(out, matrix);
  } else {
    // Prices follow p(t) = p(t-1) exp(0.01 x(t)) from 100.
    out << "date,SYN001,SYN002\n";
    double px = 100.0;
    double py = 100.0;
    out << iso_date(0) << ',' << text::format_number(px) << ',' << text::format_number(py) << '\n';
    for (std::size_t t = 0; t < cfg.length; ++t) {
      px *= std::exp(0.01 * s.x[t]);
      py *= std::exp(0.01 * s.y[t]);
      out << iso_date(static_cast<int>(t) + 1) << ',' << text::format_number(px) << ','
          << text::format_number(py) << '\n';
    }
  }
  std::cout << json{{"output", cfg.output}, {"length", cfg.length}, {"model", m.family}}.dump()
            << '\n';
}

void cmd_grid(const Config& cfg) {
  if (cfg.bins < 2) fail(ErrorKind::kParameter, "bins must be >= 2");
  if (cfg.output.empty()) fail(ErrorKind::kParameter, "--output is required");
  const auto model = build_model(cfg.model);
  const auto mode = parse_evaluation(cfg.grid_evaluation);
  const auto grid = analytic::evaluate_grid(model, cfg.bins, mode);
  grid_io::save_grid(cfg.output, grid.density,
                     grid_io::make_sidecar(cfg.bins, "analytic_" + analytic::to_string(mode),
                                           analytic::model_tag(model),
                                           analytic::model_parameters(model), 0, 0));
  std::cout << json{{"output", cfg.output}, {"total_mass", grid.density.total_mass()}}.dump()
            << '\n';
}

void cmd_diff(const Config& cfg) {
  const auto a = grid_io::load_grid(cfg.first);
  const auto b = grid_io::load_grid(cfg.second);
  const double sum = fitting::lms_loss(a.grid, b.grid, fitting::LossConvention::kSum);
  const double mean = fitting::lms_loss(a.grid, b.grid, fitting::LossConvention::kMean);
  if (!cfg.output.empty()) {
    DensityGrid d(a.grid.bins);
    for (std::size_t i = 0; i < d.cells.size(); ++i) d.cells[i] = a.grid.cells[i] - b.grid.cells[i];
    grid_io::save_grid(cfg.output, d,
                       grid_io::make_sidecar(d.bins, "difference", "", json::object(), 0, 0));
  }
  std::cout << json{{"loss_sum", sum}, {"loss_mean", mean}}.dump() << '\n';
}

int report(const char* kind, const std::string& message, int code) {
  std::cerr << json{{"error", kind}, {"message", message}, {"exit_code", code}}.dump() << '\n';
  return code;
}

void add_model_options(CLI::App* cmd, ModelArgs& m) {
  cmd->add_option("--model", m.family, "gaussian, k or skewed_t")->capture_default_str();
  cmd->add_option("--c", m.c, "correlation")->capture_default_str();
  cmd->add_option("--n", m.n, "K-copula N")->capture_default_str();
  cmd->add_option("--nu", m.nu, "skewed t degrees of freedom")->capture_default_str();
  cmd->add_option("--gamma", m.gamma, "skewed t skewness")->capture_default_str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Empirical and analytic copulas of financial returns"};
  app.set_config("--config", "", "TOML configuration; flags override its values");
  app.require_subcommand(1);
  Config cfg;

  auto* returns = app.add_subcommand("returns", "Price CSV to original and locally normalized returns");
  returns->add_option("--input", cfg.input, "price CSV (wide or long)")->required();
  returns->add_option("--output-dir", cfg.output_dir)->capture_default_str();
  returns->add_option("--normalization", cfg.normalization, "original, local or both")
      ->capture_default_str();
  returns->add_option("--window", cfg.window)->capture_default_str();
  returns->add_option("--alignment", cfg.alignment, "include_current or strictly_preceding")
      ->capture_default_str();
  returns->add_option("--max-missing", cfg.max_missing, "drop tickers missing more dates than this")
      ->capture_default_str();

  auto* empcop = app.add_subcommand("empcop", "Averaged empirical copula and asymmetry histograms");
  empcop->add_option("--input", cfg.input, "return matrix file")->required();
  empcop->add_option("--output-dir", cfg.output_dir)->capture_default_str();
  empcop->add_option("--bins", cfg.bins)->capture_default_str();
  empcop->add_option("--asymmetry-bin-width", cfg.asymmetry_bin_width)->capture_default_str();
  empcop->add_option("--correlation-bin-width", cfg.correlation_bin_width)->capture_default_str();

  auto* asym = app.add_subcommand("asym", "Tail asymmetry of a grid file");
  asym->add_option("--input", cfg.input, "grid CSV")->required();

  auto* fit = app.add_subcommand("fit", "Fit and compare the analytic families");
  fit->add_option("--input", cfg.input, "return matrix file")->required();
  fit->add_option("--output-dir", cfg.output_dir)->capture_default_str();
  fit->add_option("--bins", cfg.bins)->capture_default_str();
  fit->add_option("--loss", cfg.loss, "sum or mean")->capture_default_str();
  fit->add_option("--models", cfg.models, "subset of gaussian cwg k skewed_t")->capture_default_str();
  fit->add_option("--grid-evaluation", cfg.grid_evaluation, "cell_average or bin_center")
      ->capture_default_str();
  fit->add_option("--n-range", cfg.n_range)->expected(2)->capture_default_str();
  fit->add_option("--nu-range", cfg.nu_range)->expected(2)->capture_default_str();
  fit->add_option("--gamma-range", cfg.gamma_range)->expected(2)->capture_default_str();
  fit->add_option("--scan-points", cfg.scan_points)->capture_default_str();
  fit->add_option("--correlation-bin-width", cfg.correlation_bin_width)->capture_default_str();

  auto* sample = app.add_subcommand("sample", "Synthetic bivariate data");
  add_model_options(sample, cfg.model);
  sample->add_option("--length", cfg.length, "number of returns")->capture_default_str();
  sample->add_option("--seed", cfg.seed)->capture_default_str();
  sample->add_option("--stream", cfg.stream)->capture_default_str();
  sample->add_option("--method", cfg.method, "K sampler: gamma_mixture or wishart")
      ->capture_default_str();
  sample->add_option("--format", cfg.format, "prices or returns")->capture_default_str();
  sample->add_option("--output", cfg.output)->required();

  auto* grid = app.add_subcommand("grid", "Analytic copula density grid");
  add_model_options(grid, cfg.model);
  grid->add_option("--bins", cfg.bins)->capture_default_str();
  grid->add_option("--grid-evaluation", cfg.grid_evaluation, "cell_average or bin_center")
      ->capture_default_str();
  grid->add_option("--output", cfg.output)->required();

  auto* diff = app.add_subcommand("diff", "Difference and loss between two grids");
  diff->add_option("first", cfg.first)->required();
  diff->add_option("second", cfg.second)->required();
  diff->add_option("--output", cfg.output, "difference grid CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    return report("usage", e.what(), kExitInput);
  }

  try {
    if (*returns) cmd_returns(cfg);
    if (*empcop) cmd_empcop(cfg);
    if (*asym) cmd_asym(cfg);
    if (*fit) cmd_fit(cfg);
    if (*sample) cmd_sample(cfg);
    if (*grid) cmd_grid(cfg);
    if (*diff) cmd_diff(cfg);
  } catch (const Error& e) {
    return report(to_string(e.kind()), e.what(), e.is_input_error() ? kExitInput : kExitNumerical);
  } catch (const fs::filesystem_error& e) {
    return report("io", e.what(), kExitInput);
  } catch (const std::exception& e) {
    return report("internal", e.what(), kExitNumerical);
  }
  return 0;
}
