#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace cvmdi::csv {

/// Shortest decimal representation that round-trips, '.' as separator.
std::string format_double(double value);

/// Strict full-field parse; throws DatasetError on trailing garbage.
double parse_double(std::string_view field);

std::vector<std::string_view> split(std::string_view line, char sep = ',');

std::string_view trim(std::string_view text);

}  // namespace cvmdi::csv
