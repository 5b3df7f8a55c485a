#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace roadpop::csv {

/// Splits one line on `delim`, honouring double-quoted fields ("" escapes a quote).
std::vector<std::string> split_line(std::string_view line, char delim = ',');

std::string_view trim(std::string_view s);

std::optional<double> parse_double(std::string_view s);

/// Quotes a field only when it contains the delimiter, a quote, or a newline.
std::string quote(std::string_view field, char delim = ',');

/// Formats a double with the shortest representation that round-trips.
std::string format_double(double v);

/// Formats with fixed decimal places.
std::string format_fixed(double v, int decimals);

}  // namespace roadpop::csv
