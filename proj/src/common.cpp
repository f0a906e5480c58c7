#include "lanesim/common.hpp"

#include <cstdio>
#include <cstdlib>

namespace lanesim {

std::string to_hex16(uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

std::string format_double(double v) {
  // Shortest decimal that parses back to the exact same double; text files
  // holding poses and geometry must reload bit-identically.
  char buf[40];
  for (int prec = 12; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof(buf), "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return std::string(buf);
}

}  // namespace lanesim
