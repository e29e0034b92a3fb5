#pragma once

#include <cstddef>
#include <cstdint>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <stdexcept>
#include <string>
#include <vector>

namespace bcev::io {

/// Malformed input data; carries the 1-based line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

/// Shortest round-trippable form is not required; 17 significant digits is.
std::string format_double(double v);
double parse_double(const std::string& text, std::size_t line);

/// Numeric table with named columns.
struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  std::size_t column(const std::string& name) const;
  std::vector<double> values(const std::string& name) const;
};

void write_csv(std::ostream& out, const Table& table);
void write_csv_row(std::ostream& out, const std::vector<double>& row);
void write_csv_header(std::ostream& out, const std::vector<std::string>& columns);
Table read_csv(std::istream& in);

/// Data file holding one observation vector, either as a single row or as a
/// single column. Blank lines and lines starting with '#' are skipped.
std::vector<double> read_observation_vector(std::istream& in);
/// One observation vector per non-blank row.
std::vector<std::vector<double>> read_observation_rows(std::istream& in);

/// Flat sectioned key=value configuration (INI). Keys are addressed as
/// "section.key".
class KeyValueConfig {
 public:
  KeyValueConfig() = default;

  static KeyValueConfig parse(std::istream& in);
  static KeyValueConfig load(const std::string& path);

  bool has(const std::string& key) const { return values_.count(key) != 0; }
  std::optional<std::string> get(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  std::size_t get_count(const std::string& key, std::size_t fallback) const;
  std::uint64_t get_u64(const std::string& key, std::uint64_t fallback) const;
  std::vector<double> get_doubles(const std::string& key, std::vector<double> fallback) const;
  std::vector<std::size_t> get_counts(const std::string& key, std::vector<std::size_t> fallback) const;

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  void merge(const KeyValueConfig& other);

  /// Keys under "section." with the prefix removed.
  std::map<std::string, std::string> section(const std::string& name) const;
  std::vector<std::string> sections() const;
  const std::map<std::string, std::string>& entries() const { return values_; }

  void write(std::ostream& out) const;

 private:
  std::map<std::string, std::string> values_;
};

}  // namespace bcev::io
