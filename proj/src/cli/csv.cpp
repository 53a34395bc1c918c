#include "fockblock/cli/csv.hpp"

#include <charconv>
#include <cmath>

#include "fockblock/error.hpp"

namespace fockblock::cli {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (v == 0) v = 0;  // drop the sign of -0
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  if (ec != std::errc()) throw InvalidArgument("format_double: conversion failed");
  return std::string(buf, ptr);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> row) {
  if (row.size() != header_.size())
    throw DimensionMismatch("csv row has " + std::to_string(row.size()) + " cells, header has " +
                            std::to_string(header_.size()));
  rows_.push_back(std::move(row));
}

void CsvTable::append(const CsvTable& other, const std::vector<std::string>& prefix) {
  if (prefix.size() + other.header_.size() != header_.size())
    throw DimensionMismatch("csv append: column count mismatch");
  for (const auto& r : other.rows_) {
    std::vector<std::string> row = prefix;
    row.insert(row.end(), r.begin(), r.end());
    rows_.push_back(std::move(row));
  }
}

std::string CsvTable::str() const {
  std::string out;
  auto line = [&](const std::vector<std::string>& cells) {
    for (std::size_t k = 0; k < cells.size(); ++k) {
      if (k) out += ',';
      out += cells[k];
    }
    out += '\n';
  };
  line(header_);
  for (const auto& r : rows_) line(r);
  return out;
}

}  // namespace fockblock::cli
