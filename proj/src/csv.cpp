#include "fleetopt/csv.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace fleetopt::csv {

std::vector<std::string> split_record(std::string_view line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field.push_back(c);
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(std::move(field));
      field.clear();
    } else {
      field.push_back(c);
    }
  }
  if (quoted) throw CsvError("unterminated quote");
  out.push_back(std::move(field));
  return out;
}

namespace {
std::string trim(std::string s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}
}  // namespace

Table Table::read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw CsvError("cannot open " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse(ss.str(), path.string());
}

Table Table::parse(std::string_view text, const std::string& source) {
  Table t;
  t.source_ = source;
  // Strip a UTF-8 byte order mark, common in GTFS exports.
  if (text.size() >= 3 && text.substr(0, 3) == "\xEF\xBB\xBF") text.remove_prefix(3);
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    pos = nl + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty()) {
      if (nl == text.size()) break;
      continue;
    }
    std::vector<std::string> fields;
    try {
      fields = split_record(line);
    } catch (const CsvError& e) {
      throw CsvError(source + ":" + std::to_string(line_no) + ": " + e.what());
    }
    for (auto& f : fields) f = trim(std::move(f));
    if (t.header_.empty()) {
      t.header_ = std::move(fields);
      for (std::size_t i = 0; i < t.header_.size(); ++i) t.index_.emplace(t.header_[i], i);
      continue;
    }
    if (fields.size() != t.header_.size()) {
      throw CsvError(source + ":" + std::to_string(line_no) + ": expected " + std::to_string(t.header_.size()) +
                     " fields, got " + std::to_string(fields.size()));
    }
    t.rows_.push_back(std::move(fields));
  }
  if (t.header_.empty()) throw CsvError(source + ": missing header");
  return t;
}

std::size_t Table::column(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw CsvError(source_ + ": missing column '" + name + "'");
  return it->second;
}

std::optional<double> Table::number(std::size_t row, std::size_t col) const {
  const std::string& s = rows_[row][col];
  if (s.empty()) return std::nullopt;
  return parse_double(s, source_ + " column " + header_[col]);
}

double parse_double(std::string_view s, std::string_view what) {
  double v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw CsvError("bad number '" + std::string(s) + "' in " + std::string(what));
  return v;
}

long long parse_int(std::string_view s, std::string_view what) {
  long long v = 0;
  const auto* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end) throw CsvError("bad integer '" + std::string(s) + "' in " + std::string(what));
  return v;
}

std::string fmt6(double x) {
  if (std::abs(x) < 5e-7) x = 0.0;
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}

}  // namespace fleetopt::csv
