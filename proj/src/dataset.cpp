#include "aivgt/dataset.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "aivgt/errors.hpp"

namespace aivgt {

int Dataset::col(std::string_view name) const {
  for (int i = 0; i < p(); ++i)
    if (columns[i] == name) return i;
  throw input_error("unknown column: " + std::string(name));
}

bool Dataset::has_col(std::string_view name) const {
  for (const auto& c : columns)
    if (c == name) return true;
  return false;
}

Eigen::VectorXd Dataset::column(std::string_view name) const {
  return values.col(col(name));
}

void Dataset::validate() const {
  if (static_cast<int>(columns.size()) != p())
    throw input_error("column name count does not match value columns");
  if (n() < 2) throw input_error("dataset needs at least two rows");
  std::set<std::string> seen;
  for (const auto& c : columns)
    if (!seen.insert(c).second) throw input_error("duplicate column name: " + c);
  if (!values.allFinite()) throw input_error("dataset contains missing or non-finite values");
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

double parse_cell(const std::string& cell, int line, int col) {
  if (cell.empty())
    throw input_error("empty cell at line " + std::to_string(line) + ", column " +
                      std::to_string(col + 1));
  char* end = nullptr;
  double v = std::strtod(cell.c_str(), &end);
  if (end == cell.c_str() || *end != '\0' || !std::isfinite(v))
    throw input_error("non-numeric cell '" + cell + "' at line " + std::to_string(line) +
                      ", column " + std::to_string(col + 1));
  return v;
}

}  // namespace

Dataset parse_csv(const std::string& text, std::string provenance) {
  std::istringstream is(text);
  std::string line;
  if (!std::getline(is, line)) throw input_error("empty CSV");
  Dataset d;
  d.provenance = std::move(provenance);
  d.columns = split_csv_line(line);
  const int p = static_cast<int>(d.columns.size());

  std::vector<double> cells;
  long rows = 0;
  int lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_csv_line(line);
    if (static_cast<int>(fields.size()) != p)
      throw input_error("line " + std::to_string(lineno) + ": expected " + std::to_string(p) +
                        " cells, got " + std::to_string(fields.size()));
    for (int c = 0; c < p; ++c) cells.push_back(parse_cell(fields[c], lineno, c));
    ++rows;
  }
  d.values.resize(rows, p);
  for (long r = 0; r < rows; ++r)
    for (int c = 0; c < p; ++c) d.values(r, c) = cells[r * p + c];
  d.validate();
  return d;
}

Dataset read_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw input_error("cannot open CSV file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), path);
}

std::string to_csv(const Dataset& d) {
  std::ostringstream os;
  for (int c = 0; c < d.p(); ++c) {
    if (c) os << ',';
    os << d.columns[c];
  }
  os << '\n';
  char buf[48];
  for (long r = 0; r < d.n(); ++r) {
    for (int c = 0; c < d.p(); ++c) {
      if (c) os << ',';
      std::snprintf(buf, sizeof(buf), "%.17g", d.values(r, c));
      os << buf;
    }
    os << '\n';
  }
  return os.str();
}

void write_csv(const Dataset& d, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw input_error("cannot write CSV file: " + path);
  out << to_csv(d);
}

}  // namespace aivgt
