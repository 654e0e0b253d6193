#pragma once

#include <string>

namespace nla {

/// 12 significant digits; scientific notation below 1e-4 in magnitude.
/// Non-finite values print as "nan", "inf" or "-inf".
std::string format_number(double x);

}  // namespace nla
