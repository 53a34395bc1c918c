#pragma once

#include <string>
#include <vector>

namespace fockblock::cli {

// Shortest representation that parses back to the same double.
// NaN prints as "nan", infinities as "inf" / "-inf".
std::string format_double(double v);

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  const std::vector<std::string>& header() const noexcept { return header_; }
  std::size_t rows() const noexcept { return rows_.size(); }

  void add_row(std::vector<std::string> row);
  // Appends `other` with `prefix` cells in front of every row.
  void append(const CsvTable& other, const std::vector<std::string>& prefix);

  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace fockblock::cli
