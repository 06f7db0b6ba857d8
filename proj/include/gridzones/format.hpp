#pragma once

#include <string>

namespace gridzones {

/// 12 significant digits, "%.12g" style; negative zero prints as 0.
std::string format_number(double value);

/// value rounded to 12 significant digits, so JSON output is stable.
double round12(double value);

}  // namespace gridzones
