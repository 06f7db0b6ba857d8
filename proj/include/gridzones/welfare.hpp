#pragma once

#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "gridzones/clustering.hpp"
#include "gridzones/opf.hpp"
#include "gridzones/scenarios.hpp"

namespace gridzones {

struct WelfareConfig {
    OpfTolerances tol;
    double infeasible_penalty = 1e6;  // currency/h per infeasible zone sub-problem
    int threads = 1;
};

/// total = energy_value + balancing_cost - congestion_rent
struct CostBreakdown {
    double energy_value = 0.0;
    double balancing_cost = 0.0;
    double congestion_rent = 0.0;
    double total = 0.0;
    std::vector<double> zonal_prices;  // empty for the uniform market
    int infeasible_zones = 0;
};

/// Pay-as-bid redispatch cost: upward moves paid, downward moves bought back,
/// both at the unit's marginal cost.
double redispatch_cost(std::span<const Generator> generators, std::span<const double> before,
                       std::span<const double> after);

/// Unconstrained run sets the uniform price and energy value; the fully
/// constrained run gives the balancing redispatch. Throws InfeasibleError if
/// the constrained dispatch is infeasible (scenario unservable).
CostBreakdown uniform_market_cost(const Network& network, const WindScenario& scenario,
                                  const WelfareConfig& config = {});

/// Intermediate results of the two-step zonal simulation.
struct ZonalSimulation {
    DispatchSolution coupling;                  // limits on inter-zonal branches only
    std::vector<int> inter_zonal_branches;
    std::vector<Subnetwork> zones;
    std::vector<std::vector<double>> border_injection;  // per zone, per local bus
    std::vector<DispatchSolution> zone_dispatch;
    CostBreakdown cost;
};

/// Market coupling followed by per-zone balancing; operates on a network with
/// the scenario already applied.
ZonalSimulation simulate_zonal_market(const Network& applied, const Partition& partition,
                                      const WelfareConfig& config = {});

CostBreakdown zonal_market_cost(const Network& network, const Partition& partition,
                                const WindScenario& scenario, const WelfareConfig& config = {});

struct CandidateCost {
    Partition partition;
    CostBreakdown mean;       // unweighted mean over servable scenarios
    int infeasible_count = 0; // scenarios with at least one infeasible zone
};

struct WelfareReport {
    std::vector<CandidateCost> per_partition;  // deduplicated, input order
    std::size_t best = 0;
    int servable_scenarios = 0;
    int unservable_scenarios = 0;

    const CandidateCost& best_candidate() const { return per_partition.at(best); }
};

/// Scenario-level evaluation state shared across many candidate partitions.
/// Applied networks and unservable scenarios are resolved once; per-partition
/// cost vectors are cached, so re-evaluating an incumbent is free.
/// Thread-safe for concurrent evaluate() calls.
class WelfareEvaluator {
public:
    WelfareEvaluator(const Network& network, const ScenarioSet& scenarios, WelfareConfig config = {});

    const std::vector<CostBreakdown>& per_scenario(const Partition& partition);
    CandidateCost evaluate(const Partition& partition);

    int servable_scenarios() const noexcept { return static_cast<int>(servable_.size()); }
    int unservable_scenarios() const noexcept { return unservable_; }
    const WelfareConfig& config() const noexcept { return config_; }

private:
    const Network* network_;
    WelfareConfig config_;
    std::vector<Network> servable_;
    int unservable_ = 0;
    std::mutex mutex_;
    std::map<std::vector<int>, std::shared_ptr<const std::vector<CostBreakdown>>> cache_;
};

/// Scenario-averaged costs for each distinct candidate. The k = 1 division is
/// added if missing. best minimises the mean total, ties by smaller k then
/// lexicographic zone_of. Throws InfeasibleError when no scenario is servable.
WelfareReport evaluate_divisions(const Network& network, const ScenarioSet& scenarios,
                                 std::vector<Partition> candidates, const WelfareConfig& config = {});
WelfareReport evaluate_divisions(WelfareEvaluator& evaluator, std::vector<Partition> candidates);

std::string welfare_report_to_json(const WelfareReport& report);

/// Columns: k, energy_value, balancing_cost, congestion_rent, total,
/// infeasible_count (plus a leading method column when `method` is non-empty).
std::string welfare_report_to_csv(const WelfareReport& report, const std::string& method = "",
                                  bool header = true);

}  // namespace gridzones
