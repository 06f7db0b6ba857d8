#include "gridzones/format.hpp"

#include <cstdlib>

#include <fmt/format.h>

namespace gridzones {

std::string format_number(double value) {
    if (value == 0.0) value = 0.0;  // drops the sign of -0
    auto s = fmt::format("{:.12g}", value);
    if (s == "-0") s = "0";
    return s;
}

double round12(double value) {
    double r = std::strtod(format_number(value).c_str(), nullptr);
    return r == 0.0 ? 0.0 : r;
}

}  // namespace gridzones
