#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace psaflow::text {

// Shortest decimal form that parses back to the identical double.
std::string format_double(double value);

// Fixed six-decimal form used for fractions in reports.
std::string format_fraction(double value);

// Whole-string parses; nullopt on trailing garbage or overflow.
std::optional<double> parse_double(std::string_view s);
std::optional<long long> parse_int(std::string_view s);

std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

}  // namespace psaflow::text
