#pragma once

#include <string>
#include <vector>

namespace xeq::csv {

// Minimal RFC-4180-ish reader: comma separated, double quotes protect
// commas and embedded quotes ("" escapes a quote), CRLF tolerated.
std::vector<std::string> split_line(const std::string& line);

// Whole file as rows of cells. Throws ParseError when the file cannot be
// opened or a quoted field is left open.
std::vector<std::vector<std::string>> read_file(const std::string& path);

std::string escape(const std::string& cell);

}  // namespace xeq::csv
