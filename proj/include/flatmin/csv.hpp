#pragma once

#include <charconv>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

namespace flatmin {

/// Shortest decimal that round-trips to the same double; locale independent.
inline std::string format_double(double x) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

/// Row-oriented CSV builder with '\n' line endings.
class CsvWriter {
 public:
  explicit CsvWriter(std::initializer_list<std::string_view> header) {
    std::vector<std::string> h(header.begin(), header.end());
    add_header(h);
  }
  explicit CsvWriter(const std::vector<std::string>& header) { add_header(header); }

  CsvWriter& cell(double x) { return raw(format_double(x)); }
  CsvWriter& cell(std::int64_t x) { return raw(std::to_string(x)); }
  CsvWriter& cell(int x) { return raw(std::to_string(x)); }
  CsvWriter& cell(std::size_t x) { return raw(std::to_string(x)); }

  void end_row() {
    out_ += '\n';
    at_line_start_ = true;
    ++rows_;
  }

  const std::string& str() const noexcept { return out_; }
  std::size_t rows() const noexcept { return rows_; }

 private:
  void add_header(const std::vector<std::string>& h) {
    for (const auto& col : h) raw(col);
    out_ += '\n';
    at_line_start_ = true;
  }

  CsvWriter& raw(std::string_view s) {
    if (!at_line_start_) out_ += ',';
    out_ += s;
    at_line_start_ = false;
    return *this;
  }

  std::string out_;
  bool at_line_start_ = true;
  std::size_t rows_ = 0;
};

}  // namespace flatmin
