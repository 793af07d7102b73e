#include "xeq/csv.hpp"

#include <fstream>

#include "xeq/errors.hpp"

namespace xeq::csv {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char ch = line[i];
    if (quoted) {
      if (ch == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cell.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cell.push_back(ch);
      }
    } else if (ch == '"') {
      quoted = true;
    } else if (ch == ',') {
      cells.push_back(cell);
      cell.clear();
    } else if (ch == '\r') {
      // swallow CR from CRLF files
    } else {
      cell.push_back(ch);
    }
  }
  if (quoted) {
    fail(Errc::ParseError, "unterminated quoted field in line: " + line);
  }
  cells.push_back(cell);
  return cells;
}

std::vector<std::vector<std::string>> read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    fail(Errc::ParseError, "cannot open '" + path + "'");
  }
  std::vector<std::vector<std::string>> rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || (line.size() == 1 && line[0] == '\r')) continue;
    rows.push_back(split_line(line));
  }
  return rows;
}

std::string escape(const std::string& cell) {
  if (cell.find_first_of(",\"\n") == std::string::npos) return cell;
  std::string out = "\"";
  for (char ch : cell) {
    if (ch == '"') out += "\"\"";
    else out.push_back(ch);
  }
  out += "\"";
  return out;
}

}  // namespace xeq::csv
