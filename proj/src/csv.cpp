#include "gridsmooth/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace gridsmooth {

namespace {

bool parse_cell(const std::string& cell, double* out) {
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  // tolerate surrounding spaces
  while (first < last && (*first == ' ' || *first == '\t')) ++first;
  while (last > first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  if (first == last) return false;
  const auto [ptr, ec] = std::from_chars(first, last, *out);
  return ec == std::errc() && ptr == last;
}

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, ',')) cells.push_back(cell);
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

CurveBatch read_curves(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("cannot open '" + path + "' for reading");

  CurveBatch batch;
  std::string line;
  int row_number = 0;
  bool checked_header = false;
  while (std::getline(in, line)) {
    ++row_number;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_row(line);

    if (!checked_header) {
      checked_header = true;
      double probe;
      bool numeric = true;
      for (const auto& c : cells)
        if (!parse_cell(c, &probe)) {
          numeric = false;
          break;
        }
      if (!numeric) continue;  // header row
    }

    if (batch.d == 0) {
      batch.d = static_cast<int>(cells.size());
    } else if (static_cast<int>(cells.size()) != batch.d) {
      throw parse_error("'" + path + "': row " + std::to_string(row_number) + " has " +
                        std::to_string(cells.size()) + " cells, expected " +
                        std::to_string(batch.d));
    }
    for (std::size_t c = 0; c < cells.size(); ++c) {
      double v;
      if (!parse_cell(cells[c], &v))
        throw parse_error("'" + path + "': non-numeric cell at row " +
                          std::to_string(row_number) + ", column " + std::to_string(c + 1));
      batch.values.push_back(v);
    }
    ++batch.n;
  }
  if (batch.n == 0) throw parse_error("'" + path + "': no curves found");
  return batch;
}

void write_curves(const std::string& path, const CurveBatch& batch, bool with_header) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io_error("cannot open '" + path + "' for writing");
  if (with_header) {
    for (int j = 0; j < batch.d; ++j) {
      if (j) out << ',';
      out << 't' << (j + 1);
    }
    out << '\n';
  }
  for (int i = 0; i < batch.n; ++i) {
    const auto row = batch.row(i);
    for (int j = 0; j < batch.d; ++j) {
      if (j) out << ',';
      out << format_double(row[static_cast<std::size_t>(j)]);
    }
    out << '\n';
  }
  if (!out) throw io_error("failed writing '" + path + "'");
}

}  // namespace gridsmooth
