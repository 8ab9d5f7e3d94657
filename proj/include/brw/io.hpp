#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace brw {

/// The first of 15, 16 or 17 significant digits that reads back to the same
/// double.
std::string format_number(double value);
std::string format_number(std::int64_t value);
std::string format_number(std::uint64_t value);
inline std::string format_number(int value) { return format_number(static_cast<std::int64_t>(value)); }

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  template <class... Cells>
  void add(const Cells&... cells) {
    rows.push_back({cell(cells)...});
  }

 private:
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }
  static std::string cell(bool b) { return b ? "true" : "false"; }
  template <class T>
  static std::string cell(const T& v) {
    return format_number(v);
  }
};

/// RFC 4180 text with "\n" line ends; fields with commas, quotes or line
/// breaks are quoted.
std::string to_csv(const CsvTable& table);

/// Writes to a temporary file beside `path` and renames it into place. The
/// directory must exist. Throws IoFailure.
void write_file_atomic(const std::string& path, const std::string& content);

}  // namespace brw
