#pragma once

#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace dpre::csv {

std::vector<std::string> split(std::string_view line, char sep = ',');
std::string trim(std::string_view s);

// Reads data rows, skipping blank and '#' comment lines. The first remaining
// line is treated as the header and checked against `expected_header`.
std::vector<std::vector<std::string>> read_rows(std::istream& in,
                                                std::string_view expected_header);

void write_hash_comment(std::ostream& out, std::string_view config_hash);

// Shortest round-trippable decimal form.
std::string format_double(double v);

}  // namespace dpre::csv
