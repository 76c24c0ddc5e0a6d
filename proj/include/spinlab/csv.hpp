#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace spinlab {

// lossless round-trip for doubles
std::string csvNum(double v);
std::string csvNum(int v);
std::string csvNum(std::uint64_t v);

// One data table: a '#' metadata line, a header row, then data rows.
class CsvTable {
public:
  CsvTable(std::string metadata, std::vector<std::string> columns);

  void addRow(std::vector<std::string> cells);
  std::uint64_t rowCount() const { return static_cast<std::uint64_t>(rows_.size()); }
  const std::vector<std::vector<std::string>>& rows() const { return rows_; }
  const std::vector<std::string>& columns() const { return columns_; }

  std::string render() const;
  void writeTo(const std::string& path) const;

private:
  std::string metadata_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace spinlab
