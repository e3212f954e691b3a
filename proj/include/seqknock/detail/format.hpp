#pragma once

#include <charconv>
#include <cmath>
#include <string>
#include <system_error>

namespace seqknock::detail {

/// Shortest round-trip decimal form; locale-independent, so output files are
/// byte-stable across platforms and runs.
inline std::string format_double(double value) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  if (value == 0.0) return "0";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return res.ec == std::errc{} ? std::string(buf, res.ptr) : std::string("nan");
}

/// CSV field with RFC 4180 quoting when needed.
inline std::string csv_field(const std::string& text) {
  if (text.find_first_of(",\"\r\n") == std::string::npos) return text;
  std::string out = "\"";
  for (const char c : text) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace seqknock::detail
