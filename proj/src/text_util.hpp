#pragma once

#include <charconv>
#include <cstdio>
#include <istream>
#include <optional>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "gnnsde/error.hpp"

namespace gnnsde::detail {

inline std::string format_real(double value, int significant_digits = 9) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*g", significant_digits, value);
  return buf;
}

/// Round-trippable double formatting (17 significant digits).
inline std::string format_exact(double value) { return format_real(value, 17); }

inline std::vector<std::string_view> split_ws(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t' || line[i] == '\r')) ++i;
    std::size_t j = i;
    while (j < line.size() && line[j] != ' ' && line[j] != '\t' && line[j] != '\r') ++j;
    if (j > i) out.push_back(line.substr(i, j - i));
    i = j;
  }
  return out;
}

/// Reads lines, skipping blanks and '#' comments, tracking 1-based line numbers.
class LineReader {
 public:
  explicit LineReader(std::istream& in) : in_(in) {}

  std::optional<std::vector<std::string_view>> next() {
    while (std::getline(in_, current_)) {
      ++line_;
      auto tokens = split_ws(current_);
      if (tokens.empty() || tokens.front().front() == '#') continue;
      return tokens;
    }
    return std::nullopt;
  }

  std::size_t line() const noexcept { return line_; }

 private:
  std::istream& in_;
  std::string current_;
  std::size_t line_ = 0;
};

template <typename Int>
Int parse_int(std::string_view token, std::size_t line, const char* what) {
  Int value{};
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(token) + "'");
  }
  return value;
}

inline double parse_real(std::string_view token, std::size_t line, const char* what) {
  // from_chars for double is available in libstdc++ 11.
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    throw ParseError(line, std::string("invalid ") + what + " '" + std::string(token) + "'");
  }
  return value;
}

}  // namespace gnnsde::detail
