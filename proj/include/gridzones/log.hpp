#pragma once

#include <memory>

#include <spdlog/logger.h>

namespace gridzones {

/// Library-wide logger. Writes to standard error so machine output on
/// standard out stays clean.
std::shared_ptr<spdlog::logger> logger();

}  // namespace gridzones
