#pragma once

#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace scorescope::csv {

// Splits one CSV record. Supports double-quoted fields with "" escapes;
// surrounding whitespace of unquoted fields is trimmed.
std::vector<std::string> split_line(std::string_view line);

std::string_view trim(std::string_view s);

// Strict numeric parse of a whole field; nullopt on junk or non-finite.
std::optional<double> parse_double(std::string_view field);

// Reads the next non-blank line, stripping a trailing '\r'. Tracks the
// 1-based physical line number.
bool next_line(std::istream& in, std::string& line, std::size_t& line_no);

// Index of `name` in the header, or nullopt.
std::optional<std::size_t> column_index(const std::vector<std::string>& header,
                                        std::string_view name);

}  // namespace scorescope::csv
