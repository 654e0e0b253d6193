#include "nla/format.hpp"

#include <cmath>

#include <fmt/format.h>

namespace nla {

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  if (std::abs(x) < 1e-4) return fmt::format("{:.11e}", x);
  return fmt::format("{:.12g}", x);
}

}  // namespace nla
