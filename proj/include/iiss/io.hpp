#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace iiss::io {

/// Shortest decimal text that parses back to exactly `x`.
std::string format_double(double x);

/// Parses a full string as a double; throws ConfigError on trailing junk.
double parse_double(const std::string& text);

/// Minimal CSV accumulator with a fixed header. Values are written with
/// format_double so files round-trip bit-exactly.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(const std::vector<double>& values);
  void add_row(const std::vector<std::string>& cells);

  [[nodiscard]] std::size_t rows() const noexcept { return rows_; }
  [[nodiscard]] const std::string& text() const noexcept { return text_; }

  void write(const std::filesystem::path& path) const;

 private:
  std::size_t columns_;
  std::size_t rows_ = 0;
  std::string text_;
};

void write_text(const std::filesystem::path& path, const std::string& content);
std::string read_text(const std::filesystem::path& path);

}  // namespace iiss::io
