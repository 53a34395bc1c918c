#include "fockblock/cli/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

namespace fockblock::cli {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool valid_name(const std::string& s) {
  if (s.empty()) return false;
  return std::all_of(s.begin(), s.end(), [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.';
  });
}

}  // namespace

double parse_double(const std::string& text, int line) {
  const std::string t = trim(text);
  double v = 0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || t.empty()) throw ConfigError("expected a number, got '" + t + "'", line);
  if (!std::isfinite(v)) throw ConfigError("number must be finite: '" + t + "'", line);
  return v;
}

std::complex<double> parse_complex(const std::string& text, int line) {
  std::string t;
  for (char c : text)
    if (!std::isspace(static_cast<unsigned char>(c))) t += c;
  if (t.empty()) throw ConfigError("expected a complex number", line);
  if (t.back() != 'i' && t.back() != 'j') return {parse_double(t, line), 0};
  t.pop_back();
  // split at the last sign that is not part of an exponent
  std::size_t split = std::string::npos;
  for (std::size_t k = t.size(); k-- > 1;) {
    if ((t[k] == '+' || t[k] == '-') && t[k - 1] != 'e' && t[k - 1] != 'E') {
      split = k;
      break;
    }
  }
  auto imag_part = [&](const std::string& s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return parse_double(s, line);
  };
  if (split == std::string::npos) return {0, imag_part(t)};
  return {parse_double(t.substr(0, split), line), imag_part(t.substr(split))};
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string raw, section;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const std::size_t hash = raw.find('#');
    const std::string s = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("unterminated section header", line);
      section = trim(s.substr(1, s.size() - 2));
      if (!valid_name(section)) throw ConfigError("bad section name '" + section + "'", line);
      cfg.sections_[section];
      continue;
    }
    const std::size_t eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", line);
    const std::string key = trim(s.substr(0, eq));
    const std::string value = trim(s.substr(eq + 1));
    if (!valid_name(key)) throw ConfigError("bad key '" + key + "'", line);
    cfg.sections_[section].push_back({key, value, line});
  }
  return cfg;
}

bool Config::has_section(const std::string& section) const { return sections_.count(section) > 0; }

const Entry* Config::find(const std::string& section, const std::string& key) const {
  auto it = sections_.find(section);
  if (it == sections_.end()) return nullptr;
  const Entry* hit = nullptr;
  for (const auto& e : it->second) {
    if (e.key != key) continue;
    if (hit) throw ConfigError("duplicate key '" + key + "' in [" + section + "]", e.line);
    hit = &e;
  }
  return hit;
}

bool Config::has(const std::string& section, const std::string& key) const { return find(section, key) != nullptr; }

std::vector<Entry> Config::all(const std::string& section, const std::string& key) const {
  std::vector<Entry> out;
  auto it = sections_.find(section);
  if (it == sections_.end()) return out;
  for (const auto& e : it->second)
    if (e.key == key) out.push_back(e);
  return out;
}

std::string Config::get_string(const std::string& section, const std::string& key, const std::string& fallback) const {
  const Entry* e = find(section, key);
  return e ? e->value : fallback;
}

double Config::get_double(const std::string& section, const std::string& key, double fallback) const {
  const Entry* e = find(section, key);
  return e ? parse_double(e->value, e->line) : fallback;
}

std::optional<double> Config::get_optional(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  if (!e) return std::nullopt;
  return parse_double(e->value, e->line);
}

std::complex<double> Config::get_complex(const std::string& section, const std::string& key,
                                         std::complex<double> fallback) const {
  const Entry* e = find(section, key);
  return e ? parse_complex(e->value, e->line) : fallback;
}

long Config::get_int(const std::string& section, const std::string& key, long fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  const double v = parse_double(e->value, e->line);
  if (v != std::floor(v) || std::abs(v) > 1e15) throw ConfigError("expected an integer for '" + key + "'", e->line);
  return long(v);
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  const Entry* e = find(section, key);
  if (!e) return fallback;
  if (e->value == "true" || e->value == "1" || e->value == "yes") return true;
  if (e->value == "false" || e->value == "0" || e->value == "no") return false;
  throw ConfigError("expected true or false for '" + key + "'", e->line);
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key) const {
  const Entry* e = find(section, key);
  std::vector<double> out;
  if (!e) return out;
  std::string item;
  std::istringstream in(e->value);
  while (std::getline(in, item, ',')) {
    if (trim(item).empty()) continue;
    out.push_back(parse_double(item, e->line));
  }
  return out;
}

void Config::set(const std::string& section, const std::string& key, const std::string& value) {
  auto& entries = sections_[section];
  for (auto& e : entries)
    if (e.key == key) {
      e.value = value;
      return;
    }
  entries.push_back({key, value, 0});
}

void Config::require_known(const std::map<std::string, std::set<std::string>>& allowed,
                           const std::set<std::string>& repeatable) const {
  for (const auto& [section, entries] : sections_) {
    auto it = allowed.find(section);
    if (it == allowed.end()) {
      const int line = entries.empty() ? 0 : entries.front().line;
      throw ConfigError("unknown section [" + section + "]", line);
    }
    std::set<std::string> seen;
    for (const auto& e : entries) {
      if (!it->second.count(e.key)) throw ConfigError("unknown key '" + e.key + "' in [" + section + "]", e.line);
      if (!seen.insert(e.key).second && !repeatable.count(section + "." + e.key))
        throw ConfigError("duplicate key '" + e.key + "' in [" + section + "]", e.line);
    }
  }
}

}  // namespace fockblock::cli
