#pragma once

#include <charconv>
#include <string>
#include <system_error>

namespace spaasim {

// Shortest round-trippable decimal form, locale independent. Negative zero
// is normalized so re-exports stay byte-stable.
inline std::string format_double(double value) {
  if (value == 0.0) value = 0.0;
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
  if (ec != std::errc()) return "nan";
  return std::string(buf, ptr);
}

}  // namespace spaasim
