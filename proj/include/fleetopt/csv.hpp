#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace fleetopt::csv {

class CsvError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// RFC 4180 field splitting for one record (quotes, doubled quotes).
std::vector<std::string> split_record(std::string_view line);

/// Header-addressed table; every row has the header's width.
class Table {
 public:
  static Table read(const std::filesystem::path& path);
  static Table parse(std::string_view text, const std::string& source = "<memory>");

  const std::vector<std::string>& header() const { return header_; }
  std::size_t rows() const { return rows_.size(); }
  bool has_column(const std::string& name) const { return index_.contains(name); }
  std::size_t column(const std::string& name) const;

  const std::string& at(std::size_t row, std::size_t col) const { return rows_[row][col]; }
  const std::string& at(std::size_t row, const std::string& name) const { return rows_[row][column(name)]; }
  /// Parsed number; nullopt for a blank cell.
  std::optional<double> number(std::size_t row, std::size_t col) const;

 private:
  std::string source_;
  std::vector<std::string> header_;
  std::unordered_map<std::string, std::size_t> index_;
  std::vector<std::vector<std::string>> rows_;
};

double parse_double(std::string_view s, std::string_view what);
long long parse_int(std::string_view s, std::string_view what);

/// Fixed 6-decimal rendering used for all CSV output.
std::string fmt6(double x);

}  // namespace fleetopt::csv
