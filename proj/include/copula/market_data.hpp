#pragma once

// Price ingestion, returns, local normalization and Pearson correlations.

#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace copula::market_data {

struct PriceSeries {
  std::string ticker;
  std::vector<std::string> dates;  // ISO dates, strictly increasing
  std::vector<double> prices;      // adjusted close, strictly positive

  // Throws kInvalidInput / kInsufficientData.
  void validate() const;
};

enum class ReturnKind { kOriginal, kLocallyNormalized };

// Which observations enter the local mean and volatility at time t.
enum class WindowAlignment {
  kIncludeCurrent,      // r(t-w+1) .. r(t)
  kStrictlyPreceding,   // r(t-w) .. r(t-1)
};

const char* to_string(ReturnKind kind);
const char* to_string(WindowAlignment alignment);

struct ReturnMatrix {
  std::vector<std::string> tickers;
  std::vector<std::string> dates;             // row labels, may be empty
  std::vector<std::vector<double>> columns;   // one column per ticker
  ReturnKind kind = ReturnKind::kOriginal;
  int window = 0;  // locally normalized only
  WindowAlignment alignment = WindowAlignment::kIncludeCurrent;

  std::size_t rows() const { return columns.empty() ? 0 : columns.front().size(); }
  std::size_t cols() const { return columns.size(); }

  // Equal lengths, finite entries, one ticker per column.
  void validate() const;
};

// r(t) = (S(t+1) - S(t)) / S(t).
std::vector<double> compute_returns(std::span<const double> prices);

// (r(t) - mu(t)) / sigma(t) over a rolling window; sigma uses the population
// denominator. Output length is n - window + 1 (include current) or
// n - window (strictly preceding). Throws DegenerateWindowError when sigma is
// zero, carrying the input index of r(t).
std::vector<double> local_normalize(std::span<const double> returns, int window = 13,
                                    WindowAlignment alignment = WindowAlignment::kIncludeCurrent);

double pearson_correlation(std::span<const double> x, std::span<const double> y);

struct CorrelationPair {
  int k = 0;  // column indices, k < l
  int l = 0;
  double c = 0.0;
};

struct CorrelationSet {
  std::vector<CorrelationPair> pairs;
  double mean_correlation = 0.0;
};

CorrelationSet correlation_set(const ReturnMatrix& matrix);

// Price panel aligned on common dates.
struct PricePanel {
  std::vector<std::string> dates;
  std::vector<PriceSeries> series;     // all on `dates`
  std::vector<std::string> warnings;   // dropped tickers and similar
};

// Tickers missing more than `max_missing_fraction` of the union of dates are
// dropped; the rest are inner-joined on the dates they all share.
PricePanel align_prices(const std::vector<PriceSeries>& series, double max_missing_fraction = 0.01);

// Long form (date,ticker,adjusted_close) or wide form (date,<ticker>...),
// detected from the header. Empty or NA cells in wide form are missing.
std::vector<PriceSeries> read_prices_csv(std::istream& in);

ReturnMatrix original_returns(const PricePanel& panel);
ReturnMatrix locally_normalized_returns(const ReturnMatrix& original, int window = 13,
                                        WindowAlignment alignment = WindowAlignment::kIncludeCurrent);

// Soft checks on a locally normalized matrix (mean near 0, variance near 1
// for columns of length >= 250). Returns one message per offending column.
std::vector<std::string> diagnose(const ReturnMatrix& matrix);

// Wide CSV with a leading "# kind=..." metadata line.
void write_return_matrix(std::ostream& out, const ReturnMatrix& matrix);
ReturnMatrix read_return_matrix(std::istream& in);

}  // namespace copula::market_data
