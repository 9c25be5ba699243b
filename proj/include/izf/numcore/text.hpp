#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace izf::numcore {

// Shortest decimal text that parses back to the identical double.
std::string format_double(double v);
// Fixed number of decimals, for human-facing tables.
std::string format_fixed(double v, int decimals);
// Returns false if `text` is not entirely a valid number.
bool parse_double(std::string_view text, double& out);
bool parse_long(std::string_view text, long long& out);
std::vector<std::string_view> split(std::string_view line, char sep);
std::string_view trim(std::string_view s);

}  // namespace izf::numcore
