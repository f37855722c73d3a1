#pragma once

// Small helpers shared by the CSV readers and writers.

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace copula::text {

// Shortest representation that round-trips; locale independent.
std::string format_number(double value);

std::string_view trim(std::string_view s);

// Splits on commas; surrounding whitespace and double quotes are stripped.
std::vector<std::string> split_csv_line(std::string_view line);

// Parses a finite double; nullopt for empty, "NA", "NaN" or garbage.
std::optional<double> parse_number(std::string_view s);

std::string lowercase(std::string_view s);

}  // namespace copula::text
