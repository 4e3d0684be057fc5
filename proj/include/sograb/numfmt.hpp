#pragma once

#include <charconv>
#include <cstdio>
#include <string>

namespace sograb {

// Shortest decimal form that parses back to the same double; used for CSV
// fields that must be recomputable bit-exactly from the file.
inline std::string format_roundtrip(double value) {
  char buf[32];
  auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  (void)ec;
  return std::string(buf, end);
}

// 9 significant digits, the rendering used for CLI output.
inline std::string format_g9(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.9g", value);
  return std::string(buf);
}

}  // namespace sograb
