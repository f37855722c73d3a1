#include "copula/market_data.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <map>
#include <ostream>
#include <set>
#include <string>
#include <utility>

#include "copula/errors.hpp"
#include "copula/text.hpp"

namespace copula::market_data {
namespace {

bool all_equal(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [&](double x) { return x == v.front(); });
}

struct MeanStd {
  double mean;
  double sd;
};

// Two-pass mean and population standard deviation.
MeanStd moments(std::span<const double> v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  const double mean = sum / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / static_cast<double>(v.size()))};
}

std::string line_error(std::size_t line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

void sort_and_check(PriceSeries& s) {
  std::vector<std::size_t> order(s.dates.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return s.dates[a] < s.dates[b]; });
  PriceSeries sorted{s.ticker, {}, {}};
  for (std::size_t i : order) {
    if (!sorted.dates.empty() && sorted.dates.back() == s.dates[i]) {
      fail(ErrorKind::kInvalidInput,
           "ticker '" + s.ticker + "': duplicate date " + s.dates[i]);
    }
    sorted.dates.push_back(s.dates[i]);
    sorted.prices.push_back(s.prices[i]);
  }
  s = std::move(sorted);
}

}  // namespace

const char* to_string(ReturnKind kind) {
  return kind == ReturnKind::kOriginal ? "original" : "locally_normalized";
}

const char* to_string(WindowAlignment alignment) {
  return alignment == WindowAlignment::kIncludeCurrent ? "include_current" : "strictly_preceding";
}

void PriceSeries::validate() const {
  if (dates.size() != prices.size()) {
    fail(ErrorKind::kInvalidInput, "ticker '" + ticker + "': dates and prices differ in length");
  }
  if (prices.size() < 2) {
    fail(ErrorKind::kInsufficientData, "ticker '" + ticker + "': at least 2 prices required");
  }
  for (std::size_t i = 0; i < prices.size(); ++i) {
    if (!(prices[i] > 0.0) || !std::isfinite(prices[i])) {
      fail(ErrorKind::kInvalidInput, "ticker '" + ticker + "': non-positive price on " + dates[i]);
    }
    if (i > 0 && !(dates[i - 1] < dates[i])) {
      fail(ErrorKind::kInvalidInput, "ticker '" + ticker + "': dates not strictly increasing at " +
                                         dates[i]);
    }
  }
}

void ReturnMatrix::validate() const {
  if (tickers.size() != columns.size()) {
    fail(ErrorKind::kInvalidInput, "return matrix: one ticker per column required");
  }
  const std::size_t n = rows();
  if (!dates.empty() && dates.size() != n) {
    fail(ErrorKind::kInvalidInput, "return matrix: date labels do not match the row count");
  }
  for (std::size_t k = 0; k < columns.size(); ++k) {
    if (columns[k].size() != n) {
      fail(ErrorKind::kInvalidInput, "return matrix: column '" + tickers[k] + "' has wrong length");
    }
    for (double x : columns[k]) {
      if (!std::isfinite(x)) {
        fail(ErrorKind::kInvalidInput, "return matrix: non-finite entry in '" + tickers[k] + "'");
      }
    }
  }
  if (kind == ReturnKind::kLocallyNormalized && window < 2) {
    fail(ErrorKind::kParameter, "return matrix: locally normalized kind needs window >= 2");
  }
}

std::vector<double> compute_returns(std::span<const double> prices) {
  if (prices.size() < 2) {
    fail(ErrorKind::kInsufficientData, "compute_returns: at least 2 prices required, got " +
                                           std::to_string(prices.size()));
  }
  for (double p : prices) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      fail(ErrorKind::kInvalidInput, "compute_returns: prices must be positive and finite");
    }
  }
  std::vector<double> r(prices.size() - 1);
  for (std::size_t t = 0; t + 1 < prices.size(); ++t) {
    r[t] = (prices[t + 1] - prices[t]) / prices[t];
  }
  return r;
}

std::vector<double> local_normalize(std::span<const double> returns, int window,
                                    WindowAlignment alignment) {
  if (window < 2) {
    fail(ErrorKind::kParameter, "local_normalize: window must be >= 2, got " + std::to_string(window));
  }
  const std::size_t w = static_cast<std::size_t>(window);
  const std::size_t lag = alignment == WindowAlignment::kIncludeCurrent ? 0 : 1;
  const std::size_t first = w - 1 + lag;  // first t with a full window
  if (returns.size() <= first) {
    fail(ErrorKind::kInsufficientData,
         "local_normalize: " + std::to_string(returns.size()) + " returns for window " +
             std::to_string(window) + " (" + to_string(alignment) + ")");
  }
  std::vector<double> out;
  out.reserve(returns.size() - first);
  for (std::size_t t = first; t < returns.size(); ++t) {
    const auto win = returns.subspan(t + 1 - lag - w, w);
    const MeanStd m = moments(win);
    if (all_equal(win) || !(m.sd > 0.0)) {
      throw DegenerateWindowError(
          "local_normalize: zero volatility in the window ending at index " + std::to_string(t),
          t);
    }
    out.push_back((returns[t] - m.mean) / m.sd);
  }
  return out;
}

double pearson_correlation(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) fail(ErrorKind::kParameter, "pearson_correlation: length mismatch");
  if (x.size() < 2) fail(ErrorKind::kInsufficientData, "pearson_correlation: need >= 2 samples");
  if (all_equal(x) || all_equal(y)) {
    fail(ErrorKind::kDegenerateSeries, "pearson_correlation: zero-variance series");
  }
  const double mx = moments(x).mean;
  const double my = moments(y).mean;
  double sxx = 0.0;
  double syy = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double dx = x[i] - mx;
    const double dy = y[i] - my;
    sxx += dx * dx;
    syy += dy * dy;
    sxy += dx * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) {
    fail(ErrorKind::kDegenerateSeries, "pearson_correlation: zero-variance series");
  }
  // sqrt(sxx) * sqrt(syy) keeps the expression symmetric under swapping x, y.
  const double c = sxy / (std::sqrt(sxx) * std::sqrt(syy));
  return std::clamp(c, -1.0, 1.0);
}

CorrelationSet correlation_set(const ReturnMatrix& matrix) {
  matrix.validate();
  const int k_cols = static_cast<int>(matrix.cols());
  if (k_cols < 2) fail(ErrorKind::kInsufficientData, "correlation_set: need at least 2 columns");
  for (int k = 0; k < k_cols; ++k) {
    if (matrix.rows() >= 1 && all_equal(matrix.columns[k])) {
      fail(ErrorKind::kDegenerateSeries,
           "correlation_set: column '" + matrix.tickers[k] + "' has zero variance");
    }
  }
  CorrelationSet set;
  double sum = 0.0;
  for (int k = 0; k < k_cols; ++k) {
    for (int l = k + 1; l < k_cols; ++l) {
      const double c = pearson_correlation(matrix.columns[k], matrix.columns[l]);
      set.pairs.push_back({k, l, c});
      sum += c;
    }
  }
  set.mean_correlation = sum / static_cast<double>(set.pairs.size());
  return set;
}

PricePanel align_prices(const std::vector<PriceSeries>& series, double max_missing_fraction) {
  if (series.empty()) fail(ErrorKind::kInsufficientData, "no price series");
  std::set<std::string> all_dates;
  for (const auto& s : series) all_dates.insert(s.dates.begin(), s.dates.end());
  PricePanel panel;
  std::vector<const PriceSeries*> kept;
  for (const auto& s : series) {
    const double missing =
        static_cast<double>(all_dates.size() - s.dates.size()) / static_cast<double>(all_dates.size());
    if (missing > max_missing_fraction) {
      panel.warnings.push_back("dropped ticker '" + s.ticker + "': missing " +
                               text::format_number(100.0 * missing) + "% of dates");
      continue;
    }
    kept.push_back(&s);
  }
  if (kept.empty()) fail(ErrorKind::kInsufficientData, "every ticker was dropped for missing dates");
  std::map<std::string, std::size_t> count;
  for (const auto* s : kept) {
    for (const auto& d : s->dates) ++count[d];
  }
  for (const auto& [d, n] : count) {
    if (n == kept.size()) panel.dates.push_back(d);
  }
  const std::set<std::string> common(panel.dates.begin(), panel.dates.end());
  for (const auto* s : kept) {
    PriceSeries out{s->ticker, {}, {}};
    for (std::size_t i = 0; i < s->dates.size(); ++i) {
      if (common.count(s->dates[i])) {
        out.dates.push_back(s->dates[i]);
        out.prices.push_back(s->prices[i]);
      }
    }
    panel.series.push_back(std::move(out));
  }
  if (panel.dates.size() < all_dates.size()) {
    panel.warnings.push_back(std::to_string(all_dates.size() - panel.dates.size()) +
                             " dates not shared by every kept ticker were removed");
  }
  return panel;
}

std::vector<PriceSeries> read_prices_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    header = text::split_csv_line(t);
    break;
  }
  if (header.empty()) fail(ErrorKind::kInvalidInput, "price file: missing header");
  std::vector<std::string> lower;
  for (const auto& h : header) lower.push_back(text::lowercase(h));
  const bool long_form = header.size() == 3 && lower[0] == "date" &&
                         (lower[1] == "ticker" || lower[1] == "symbol");
  if (!long_form && header.size() < 2) {
    fail(ErrorKind::kInvalidInput, line_error(line_no, "header needs a date column and tickers"));
  }

  std::map<std::string, PriceSeries> by_ticker;
  const auto add = [&](const std::string& ticker, const std::string& date, double price) {
    if (!(price > 0.0)) {
      fail(ErrorKind::kInvalidInput,
           line_error(line_no, "non-positive price for '" + ticker + "' on " + date));
    }
    auto& s = by_ticker[ticker];
    s.ticker = ticker;
    s.dates.push_back(date);
    s.prices.push_back(price);
  };
  if (!long_form) {
    for (std::size_t k = 1; k < header.size(); ++k) {
      if (header[k].empty()) fail(ErrorKind::kInvalidInput, line_error(line_no, "empty ticker name"));
      if (by_ticker.count(header[k])) {
        fail(ErrorKind::kInvalidInput, line_error(line_no, "duplicate ticker '" + header[k] + "'"));
      }
      by_ticker[header[k]].ticker = header[k];
    }
  }
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = text::split_csv_line(t);
    if (fields.size() != header.size()) {
      fail(ErrorKind::kInvalidInput,
           line_error(line_no, "expected " + std::to_string(header.size()) + " fields, got " +
                                   std::to_string(fields.size())));
    }
    if (fields[0].empty()) fail(ErrorKind::kInvalidInput, line_error(line_no, "empty date"));
    if (long_form) {
      const auto price = text::parse_number(fields[2]);
      if (!price) {
        fail(ErrorKind::kInvalidInput, line_error(line_no, "unparseable price '" + fields[2] + "'"));
      }
      add(fields[1], fields[0], *price);
    } else {
      for (std::size_t k = 1; k < fields.size(); ++k) {
        const std::string cell = text::lowercase(fields[k]);
        if (cell.empty() || cell == "na" || cell == "nan" || cell == "null") continue;
        const auto price = text::parse_number(fields[k]);
        if (!price) {
          fail(ErrorKind::kInvalidInput, line_error(line_no, "unparseable price '" + fields[k] + "'"));
        }
        add(header[k], fields[0], *price);
      }
    }
  }
  std::vector<PriceSeries> out;
  for (auto& [ticker, s] : by_ticker) {
    sort_and_check(s);
    out.push_back(std::move(s));
  }
  if (out.empty()) fail(ErrorKind::kInvalidInput, "price file: no tickers");
  return out;
}

ReturnMatrix original_returns(const PricePanel& panel) {
  if (panel.dates.size() < 2) {
    fail(ErrorKind::kInsufficientData, "original returns: fewer than 2 common dates");
  }
  ReturnMatrix m;
  m.kind = ReturnKind::kOriginal;
  m.dates.assign(panel.dates.begin() + 1, panel.dates.end());
  for (const auto& s : panel.series) {
    s.validate();
    m.tickers.push_back(s.ticker);
    m.columns.push_back(compute_returns(s.prices));
  }
  return m;
}

ReturnMatrix locally_normalized_returns(const ReturnMatrix& original, int window,
                                        WindowAlignment alignment) {
  original.validate();
  ReturnMatrix m;
  m.kind = ReturnKind::kLocallyNormalized;
  m.window = window;
  m.alignment = alignment;
  m.tickers = original.tickers;
  for (std::size_t k = 0; k < original.cols(); ++k) {
    try {
      m.columns.push_back(local_normalize(original.columns[k], window, alignment));
    } catch (const DegenerateWindowError& e) {
      const std::string when =
          original.dates.empty() ? "index " + std::to_string(e.index()) : original.dates[e.index()];
      throw DegenerateWindowError(
          "column '" + original.tickers[k] + "': zero local volatility in the window ending " + when,
          e.index());
    }
  }
  if (!original.dates.empty()) {
    const std::size_t drop = original.rows() - m.rows();
    m.dates.assign(original.dates.begin() + static_cast<std::ptrdiff_t>(drop), original.dates.end());
  }
  return m;
}

std::vector<std::string> diagnose(const ReturnMatrix& matrix) {
  std::vector<std::string> messages;
  if (matrix.kind != ReturnKind::kLocallyNormalized || matrix.rows() < 250) return messages;
  for (std::size_t k = 0; k < matrix.cols(); ++k) {
    const MeanStd m = moments(matrix.columns[k]);
    const double var = m.sd * m.sd;
    if (std::abs(m.mean) > 0.1 || std::abs(var - 1.0) > 0.15) {
      messages.push_back("column '" + matrix.tickers[k] + "': mean " + text::format_number(m.mean) +
                         ", variance " + text::format_number(var) +
                         " outside the expected range for normalized returns");
    }
  }
  return messages;
}

void write_return_matrix(std::ostream& out, const ReturnMatrix& matrix) {
  matrix.validate();
  out << "# kind=" << to_string(matrix.kind);
  if (matrix.kind == ReturnKind::kLocallyNormalized) {
    out << ", window=" << matrix.window << ", alignment=" << to_string(matrix.alignment);
  }
  out << '\n' << (matrix.dates.empty() ? "index" : "date");
  for (const auto& t : matrix.tickers) out << ',' << t;
  out << '\n';
  for (std::size_t i = 0; i < matrix.rows(); ++i) {
    if (matrix.dates.empty()) {
      out << i;
    } else {
      out << matrix.dates[i];
    }
    for (const auto& col : matrix.columns) out << ',' << text::format_number(col[i]);
    out << '\n';
  }
}

ReturnMatrix read_return_matrix(std::istream& in) {
  ReturnMatrix m;
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty()) continue;
    if (t.front() == '#') {
      const auto fields = text::split_csv_line(t.substr(1));
      for (const auto& f : fields) {
        const auto eq = f.find('=');
        if (eq == std::string::npos) continue;
        const std::string key(text::trim(std::string_view(f).substr(0, eq)));
        const std::string value(text::trim(std::string_view(f).substr(eq + 1)));
        if (key == "kind") {
          if (value == "original") {
            m.kind = ReturnKind::kOriginal;
          } else if (value == "locally_normalized") {
            m.kind = ReturnKind::kLocallyNormalized;
          } else {
            fail(ErrorKind::kInvalidInput, line_error(line_no, "unknown kind '" + value + "'"));
          }
        } else if (key == "window") {
          const auto w = text::parse_number(value);
          if (!w) fail(ErrorKind::kInvalidInput, line_error(line_no, "bad window"));
          m.window = static_cast<int>(*w);
        } else if (key == "alignment") {
          m.alignment = value == "strictly_preceding" ? WindowAlignment::kStrictlyPreceding
                                                      : WindowAlignment::kIncludeCurrent;
        }
      }
      continue;
    }
    header = text::split_csv_line(t);
    break;
  }
  if (header.size() < 2) fail(ErrorKind::kInvalidInput, "return matrix: missing header");
  const bool has_dates = text::lowercase(header[0]) != "index";
  m.tickers.assign(header.begin() + 1, header.end());
  m.columns.assign(m.tickers.size(), {});
  while (std::getline(in, line)) {
    ++line_no;
    const auto t = text::trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = text::split_csv_line(t);
    if (fields.size() != header.size()) {
      fail(ErrorKind::kInvalidInput, line_error(line_no, "wrong number of fields"));
    }
    if (has_dates) m.dates.push_back(fields[0]);
    for (std::size_t k = 1; k < fields.size(); ++k) {
      const auto v = text::parse_number(fields[k]);
      if (!v) fail(ErrorKind::kInvalidInput, line_error(line_no, "unparseable value '" + fields[k] + "'"));
      m.columns[k - 1].push_back(*v);
    }
  }
  m.validate();
  return m;
}

}  // namespace copula::market_data
