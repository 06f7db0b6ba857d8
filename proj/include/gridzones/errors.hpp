#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gridzones {

/// Malformed case, scenario or config text. `line()` is 1-based, 0 when unknown.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// A model that parsed but breaks an invariant. Carries every violation found.
class ValidationError : public std::runtime_error {
public:
    explicit ValidationError(std::vector<std::string> violations)
        : std::runtime_error(join(violations)), violations_(std::move(violations)) {}
    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "invalid network";
        for (const auto& s : v) out += "; " + s;
        return out;
    }
    std::vector<std::string> violations_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised when a scenario cannot be served at all (supply below demand, or the
/// fully constrained dispatch has no feasible point).
class InfeasibleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// sign_bipartition could not produce two non-empty contiguous zones.
class DegenerateSplitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace gridzones
