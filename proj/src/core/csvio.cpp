#include "core/csvio.h"

#include <charconv>
#include <climits>
#include <cstdlib>
#include <sstream>

namespace bernkoop {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string& token) {
  const char* s = token.c_str();
  char* end = nullptr;
  const double v = std::strtod(s, &end);
  require(end != s && *end == '\0', Status::IoError, "not a number: '" + token + "'");
  return v;
}

int parse_int(const std::string& token) {
  const char* s = token.c_str();
  char* end = nullptr;
  const long v = std::strtol(s, &end, 10);
  require(end != s && *end == '\0', Status::IoError, "not an integer: '" + token + "'");
  require(v >= INT_MIN && v <= INT_MAX, Status::IoError, "integer out of range: '" + token + "'");
  return static_cast<int>(v);
}

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), Status::IoError, "cannot open " + path);
  CsvTable table;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      table.comments.push_back(line);
      continue;
    }
    std::vector<std::string> cells;
    std::istringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    if (!line.empty() && line.back() == ',') cells.push_back("");
    table.rows.push_back(std::move(cells));
  }
  return table;
}

CsvWriter::CsvWriter(const std::string& path) : out_(path), path_(path) {
  require(out_.good(), Status::IoError, "cannot open " + path + " for writing");
}

void CsvWriter::comment(const std::string& text) { out_ << "# " << text << "\n"; }

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) out_ << (i ? "," : "") << cells[i];
  out_ << "\n";
}

void CsvWriter::close() {
  out_.close();
  require(out_.good(), Status::IoError, "write failure on " + path_);
}

}  // namespace bernkoop
