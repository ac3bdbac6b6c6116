#pragma once

// Text plumbing shared by traces, summaries, presets and instance files:
// shortest round-trip doubles and `key = value` files with line context.

#include <charconv>
#include <cmath>
#include <cstdint>
#include <istream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "ragda/error.hpp"

namespace ragda {

/// Shortest decimal that parses back to the same double.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

struct KvEntry {
  std::string value;
  std::string source;
  int line = 0;

  /// "file:line", or just the source for values that came from a flag.
  std::string where() const { return line > 0 ? source + ":" + std::to_string(line) : source; }
};

inline std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

/// `key = value` lines; blank lines and `#` comments are skipped. Order is
/// preserved so later keys override earlier ones when applied in sequence.
inline std::vector<std::pair<std::string, KvEntry>> parse_key_values(std::istream& in,
                                                                     const std::string& source) {
  std::vector<std::pair<std::string, KvEntry>> out;
  std::string raw;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    std::string_view text = raw;
    if (const auto hash = text.find('#'); hash != std::string_view::npos) text = text.substr(0, hash);
    text = trim(text);
    if (text.empty()) continue;
    const auto eq = text.find('=');
    if (eq == std::string_view::npos)
      fail(ErrorCode::ConfigError, source + ":" + std::to_string(line) + ": expected 'key = value'");
    const std::string key(trim(text.substr(0, eq)));
    if (key.empty()) fail(ErrorCode::ConfigError, source + ":" + std::to_string(line) + ": empty key");
    out.emplace_back(key, KvEntry{std::string(trim(text.substr(eq + 1))), source, line});
  }
  return out;
}

inline std::int64_t parse_int(const KvEntry& e) {
  std::int64_t v = 0;
  const auto* first = e.value.data();
  const auto* last = first + e.value.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    fail(ErrorCode::ConfigError, e.where() + ": '" + e.value + "' is not an integer");
  return v;
}

inline double parse_real(const KvEntry& e) {
  double v = 0.0;
  const auto* first = e.value.data();
  const auto* last = first + e.value.size();
  const auto res = std::from_chars(first, last, v);
  if (res.ec != std::errc() || res.ptr != last)
    fail(ErrorCode::ConfigError, e.where() + ": '" + e.value + "' is not a number");
  return v;
}

inline bool parse_bool(const KvEntry& e) {
  if (e.value == "true" || e.value == "1" || e.value == "yes") return true;
  if (e.value == "false" || e.value == "0" || e.value == "no") return false;
  fail(ErrorCode::ConfigError, e.where() + ": '" + e.value + "' is not a boolean");
}

}  // namespace ragda
