#pragma once

#include <cstdio>
#include <string>

namespace genlik {

// All floating-point output goes through this: 17 significant digits,
// enough to round-trip a double, so emitted files are byte-stable.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace genlik
