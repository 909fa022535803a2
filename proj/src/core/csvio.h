#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "core/common.h"

namespace bernkoop {

// Shortest decimal string that parses back to the same double.
std::string format_double(double v);

double parse_double(const std::string& token);
int parse_int(const std::string& token);

// Rows of comma-separated cells; leading '#' lines are collected separately in
// order, blank lines are skipped.
struct CsvTable {
  std::vector<std::string> comments;
  std::vector<std::vector<std::string>> rows;
};

CsvTable read_csv(const std::string& path);

// Writes '#' comment lines, then a header row, then data rows.
class CsvWriter {
 public:
  explicit CsvWriter(const std::string& path);
  void comment(const std::string& text);
  void row(const std::vector<std::string>& cells);
  void close();

 private:
  std::ofstream out_;
  std::string path_;
};

}  // namespace bernkoop
