#pragma once

// Small parsing helpers shared by the text readers. Not installed.

#include <charconv>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "mwe/errors.h"

namespace mwe::detail {

inline void strip_cr(std::string& line) {
  if (!line.empty() && line.back() == '\r') line.pop_back();
}

inline std::vector<std::string_view> split(std::string_view line, char sep) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    std::size_t pos = line.find(sep, start);
    if (pos == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

inline std::vector<std::string_view> split_tabs(std::string_view line) {
  return split(line, '\t');
}

inline bool try_parse_u64(std::string_view text, std::uint64_t& value) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

inline bool try_parse_i64(std::string_view text, std::int64_t& value) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

inline bool try_parse_double(std::string_view text, double& value) {
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  return ec == std::errc() && ptr == text.data() + text.size() && !text.empty();
}

inline std::uint64_t parse_u64(std::string_view text, std::size_t line_no) {
  std::uint64_t value = 0;
  if (!try_parse_u64(text, value)) {
    throw FormatError("line " + std::to_string(line_no) + ": not an unsigned integer: '" +
                      std::string(text) + "'");
  }
  return value;
}

inline double parse_double(std::string_view text, std::size_t line_no) {
  double value = 0;
  if (!try_parse_double(text, value)) {
    throw FormatError("line " + std::to_string(line_no) + ": not a number: '" +
                      std::string(text) + "'");
  }
  return value;
}

// Parses `<tag> v1 <key>=<count>` and returns count.
inline std::size_t parse_header_count(std::string line, const std::string& tag,
                                      const std::string& key) {
  strip_cr(line);
  auto parts = split(line, ' ');
  if (parts.size() != 3 || parts[0] != tag) {
    throw FormatError(tag + ": bad header '" + line + "'");
  }
  if (parts[1] != "v1") {
    throw FormatError(tag + ": unsupported version '" + std::string(parts[1]) + "'");
  }
  const std::string prefix = key + "=";
  if (parts[2].substr(0, prefix.size()) != prefix) {
    throw FormatError(tag + ": bad header '" + line + "'");
  }
  return parse_u64(parts[2].substr(prefix.size()), 1);
}

}  // namespace mwe::detail
