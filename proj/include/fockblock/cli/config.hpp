#pragma once

#include <complex>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fockblock/error.hpp"

namespace fockblock::cli {

// Error tied to a config line (0 when not attributable to one).
class ConfigError : public Error {
 public:
  ConfigError(const std::string& what, int line)
      : Error("config_error", line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

struct Entry {
  std::string key;
  std::string value;
  int line = 0;
};

// Flat key = value text with [section] headers; '#' starts a comment.
// Keys before any header belong to section "".
class Config {
 public:
  static Config parse(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  bool has_section(const std::string& section) const;
  const Entry* find(const std::string& section, const std::string& key) const;
  std::vector<Entry> all(const std::string& section, const std::string& key) const;
  const std::map<std::string, std::vector<Entry>>& sections() const noexcept { return sections_; }

  std::string get_string(const std::string& section, const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& section, const std::string& key, double fallback) const;
  std::optional<double> get_optional(const std::string& section, const std::string& key) const;
  std::complex<double> get_complex(const std::string& section, const std::string& key,
                                   std::complex<double> fallback) const;
  long get_int(const std::string& section, const std::string& key, long fallback) const;
  bool get_bool(const std::string& section, const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& section, const std::string& key) const;

  // Replaces (or adds) a value, keeping the original line number.
  void set(const std::string& section, const std::string& key, const std::string& value);

  // Throws ConfigError for any section or key outside `allowed`.
  // Only keys listed in `repeatable` may appear twice.
  void require_known(const std::map<std::string, std::set<std::string>>& allowed,
                     const std::set<std::string>& repeatable = {}) const;

 private:
  std::map<std::string, std::vector<Entry>> sections_;
};

double parse_double(const std::string& text, int line);
std::complex<double> parse_complex(const std::string& text, int line);

}  // namespace fockblock::cli
