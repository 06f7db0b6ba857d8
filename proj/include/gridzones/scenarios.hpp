#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "gridzones/grid.hpp"

namespace gridzones {

enum class WindCorrelation {
    independent,  // one Weibull draw per farm
    shared,       // one draw per scenario seen by every farm
};

/// Weibull wind speed plus a cubic power curve between cut-in and rated speed.
struct WindModel {
    double weibull_shape = 2.0;
    double weibull_scale = 8.0;  // m/s
    double cut_in = 3.0;
    double rated = 12.0;
    double cut_out = 25.0;
    WindCorrelation correlation = WindCorrelation::independent;
};

/// Throws ConfigError for non-positive Weibull parameters or unordered speeds.
void validate(const WindModel& model);

/// Capacity factor in [0, 1] for a hub-height wind speed.
double capacity_factor(double speed, const WindModel& model);

/// Inverse-CDF Weibull sample for a uniform variate in (0, 1).
double weibull_speed(double uniform, const WindModel& model);

struct WindScenario {
    int id = 0;
    std::vector<double> capacity_factors;  // one per wind generator, generator order
};

struct MonteCarloSource {
    std::uint64_t seed = 0;
    WindModel params;
};

struct CsvSource {
    std::string path;
};

struct ScenarioSet {
    std::vector<WindScenario> scenarios;
    std::variant<MonteCarloSource, CsvSource> provenance;

    std::size_t size() const noexcept { return scenarios.size(); }
};

/// Deterministic for a fixed seed: each (scenario, farm) pair draws from its
/// own seeded substream, so the output does not depend on evaluation order.
ScenarioSet monte_carlo_scenarios(const Network& network, int count, std::uint64_t seed,
                                  const WindModel& params = {});

/// Header names wind-generator labels; one row of capacity factors per scenario.
ScenarioSet parse_scenarios_csv(std::string_view text, const Network& network,
                                std::string source = "<memory>");
ScenarioSet load_scenarios_csv(const std::filesystem::path& path, const Network& network);

/// Same format load_scenarios_csv reads; factors printed with 12 significant digits.
std::string scenarios_to_csv(const ScenarioSet& scenarios, const Network& network);

/// Copy of the network with every wind unit's p_max = rated_capacity * factor.
/// Throws std::invalid_argument on a factor-count mismatch and InfeasibleError
/// when the remaining capacity cannot cover demand.
Network apply_scenario(const Network& network, const WindScenario& scenario);

}  // namespace gridzones
