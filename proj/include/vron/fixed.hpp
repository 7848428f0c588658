#pragma once

#include <cmath>
#include <cstdint>
#include <string>

namespace vron {

// Filter parameters travel as signed 64-bit fixed point, scale 2^16, so
// provenance bytes are identical on every platform.
constexpr std::int64_t kFixedOne = 1 << 16;

inline std::int64_t fixed_from_double(double v) {
  return static_cast<std::int64_t>(std::llround(v * kFixedOne));
}

inline std::int64_t fixed_from_int(std::int64_t v) { return v * kFixedOne; }

inline double fixed_to_double(std::int64_t f) {
  return static_cast<double>(f) / kFixedOne;
}

inline bool fixed_is_integer(std::int64_t f) { return (f & (kFixedOne - 1)) == 0; }

inline std::int64_t fixed_to_int(std::int64_t f) { return f >> 16; }

inline std::string fixed_to_string(std::int64_t f) {
  if (fixed_is_integer(f)) return std::to_string(fixed_to_int(f));
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", fixed_to_double(f));
  return buf;
}

}  // namespace vron
