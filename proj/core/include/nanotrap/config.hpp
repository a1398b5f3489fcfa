#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace nanotrap {

struct KeyValueEntry {
  std::string section;  // empty before the first [section]
  std::string key;
  std::string value;
  int line = 0;
};

/// Reads `key = value` lines grouped under optional `[section]` headers.
/// `#` and `;` start comments. Throws ConfigError with source:line on
/// malformed lines.
std::vector<KeyValueEntry> parse_key_value(std::istream& in, std::string_view source);

/// Strict floating-point parse of the whole string (surrounding blanks
/// allowed). `where` prefixes the error message.
double parse_double(std::string_view text, std::string_view where);
long long parse_integer(std::string_view text, std::string_view where);
bool parse_bool(std::string_view text, std::string_view where);

struct ConfigKey {
  std::string_view name;          // section.key
  std::string_view default_value;
  std::string_view help;
};

/// Every recognised key with its default, in a fixed order.
const std::vector<ConfigKey>& config_keys();

// Flat key-value configuration. Starts from the defaults; a config file and
// then `section.key=value` assignments override them, so the precedence is
// command line > file > default. Unknown keys are rejected.
class ConfigStore {
 public:
  ConfigStore();

  void load_file(const std::filesystem::path& path);
  void load(std::istream& in, std::string_view source);
  /// `section.key=value`.
  void assign(std::string_view assignment);
  void set(std::string_view key, std::string value, std::string origin = "api");

  [[nodiscard]] const std::string& get(std::string_view key) const;
  [[nodiscard]] double get_double(std::string_view key) const;
  [[nodiscard]] long long get_integer(std::string_view key) const;
  [[nodiscard]] bool get_bool(std::string_view key) const;
  /// Empty or "auto" maps to nullopt.
  [[nodiscard]] std::optional<double> get_optional_double(std::string_view key) const;

  /// All keys with their resolved values, in config_keys() order.
  [[nodiscard]] std::vector<std::pair<std::string, std::string>> entries() const;
  /// INI rendering of entries(), loadable by load().
  [[nodiscard]] std::string to_ini() const;

 private:
  struct Value {
    std::string text;
    std::string origin;
  };
  std::map<std::string, Value, std::less<>> values_;

  [[nodiscard]] std::string where(std::string_view key) const;
};

}  // namespace nanotrap
