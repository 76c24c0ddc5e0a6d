#include <spinlab/csv.hpp>

#include <cstdio>
#include <fstream>
#include <stdexcept>

#include <spinlab/lattice.hpp>

namespace spinlab {

std::string csvNum(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string csvNum(int v) { return std::to_string(v); }

std::string csvNum(std::uint64_t v) { return std::to_string(v); }

CsvTable::CsvTable(std::string metadata, std::vector<std::string> columns)
    : metadata_(std::move(metadata)), columns_(std::move(columns)) {
  if (columns_.empty()) throw ContractError("csv table needs columns");
  for (const auto& c : columns_)
    if (c.find(',') != std::string::npos) throw ContractError("comma in column name");
}

void CsvTable::addRow(std::vector<std::string> cells) {
  if (cells.size() != columns_.size()) throw ContractError("csv row width != header width");
  for (const auto& c : cells)
    if (c.find(',') != std::string::npos || c.find('\n') != std::string::npos)
      throw ContractError("comma or newline in csv cell");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::render() const {
  std::string out = "# " + metadata_ + "\n";
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) out += ',';
    out += columns_[i];
  }
  out += '\n';
  for (const auto& row : rows_) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) out += ',';
      out += row[i];
    }
    out += '\n';
  }
  return out;
}

void CsvTable::writeTo(const std::string& path) const {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ContractError("cannot write '" + path + "'");
  f << render();
}

}  // namespace spinlab
