#include "gridzones/log.hpp"

#include <spdlog/sinks/stdout_sinks.h>
#include <spdlog/spdlog.h>

namespace gridzones {

std::shared_ptr<spdlog::logger> logger() {
    static const auto instance = [] {
        auto existing = spdlog::get("gridzones");
        if (existing) return existing;
        auto created = spdlog::stderr_logger_mt("gridzones");
        created->set_pattern("[%l] %v");
        return created;
    }();
    return instance;
}

}  // namespace gridzones
