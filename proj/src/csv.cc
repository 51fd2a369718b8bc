#include "dpre/csv.h"

#include <charconv>
#include <istream>
#include <ostream>

#include "dpre/errors.h"

namespace dpre::csv {

std::vector<std::string> split(std::string_view line, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      out.emplace_back(line.substr(start));
      break;
    }
    out.emplace_back(line.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  std::size_t b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  std::size_t e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::vector<std::string>> read_rows(std::istream& in,
                                                std::string_view expected_header) {
  std::vector<std::vector<std::string>> rows;
  std::string line;
  bool header_seen = false;
  while (std::getline(in, line)) {
    std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (!header_seen) {
      if (t != expected_header) {
        throw DataError("unexpected CSV header '" + t + "', expected '" +
                        std::string(expected_header) + "'");
      }
      header_seen = true;
      continue;
    }
    rows.push_back(split(t));
  }
  if (!header_seen) throw DataError("CSV input has no header row");
  return rows;
}

void write_hash_comment(std::ostream& out, std::string_view config_hash) {
  out << "# config_hash=" << config_hash << '\n';
}

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace dpre::csv
