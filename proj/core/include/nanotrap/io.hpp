#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace nanotrap {

// Comma-separated table with `# key: value` metadata lines ahead of the
// header. The first metadata entry is the schema tag.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  [[nodiscard]] std::string schema() const;
  [[nodiscard]] std::size_t column(std::string_view name) const;  // throws IoError if absent
  [[nodiscard]] double number(std::size_t row, std::string_view name) const;
  [[nodiscard]] const std::string& text(std::size_t row, std::string_view name) const;

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path) const;

  static CsvTable read(std::istream& in);
  static CsvTable load(const std::filesystem::path& path);
};

/// Shortest round-trip decimal representation ("inf", "-inf", "nan" for
/// non-finite values).
std::string format_number(double value);

/// Accepts everything format_number produces.
double parse_number(std::string_view text);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace nanotrap
