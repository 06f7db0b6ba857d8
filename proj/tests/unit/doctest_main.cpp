#define DOCTEST_CONFIG_IMPLEMENT
#include <doctest.h>

#include <spdlog/spdlog.h>

#include "gridzones/log.hpp"

int main(int argc, char** argv) {
    // Case files trigger expected warnings (quadratic costs); keep test output readable.
    gridzones::logger()->set_level(spdlog::level::err);
    doctest::Context context(argc, argv);
    return context.run();
}
