#pragma once

#include <cmath>
#include <cstdio>
#include <string>

namespace stablab {

/// Shortest round-trip-safe rendering used in every CSV cell.
inline std::string fmt_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace stablab
