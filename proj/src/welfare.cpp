#include "gridzones/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gridzones/errors.hpp"
#include "gridzones/format.hpp"
#include "gridzones/log.hpp"
#include "gridzones/parallel.hpp"

namespace gridzones {

namespace {

double generation_cost(std::span<const Generator> generators, std::span<const double> p) {
    double cost = 0.0;
    for (std::size_t g = 0; g < generators.size(); ++g) cost += generators[g].marginal_cost * p[g];
    return cost;
}

DispatchSolution solve_or_throw(const Network& network, const OpfOptions& options, const char* what) {
    DispatchSolution sol = dc_opf(network, options);
    if (!sol.feasible) throw InfeasibleError(fmt::format("{}: {}", what, sol.diagnostic));
    return sol;
}

// Highest marginal cost of a running unit in the zone; a zone that only
// imports takes its highest nodal price from the coupling run.
double zone_price(const Subnetwork& zone, const DispatchSolution& coupling, const Network& applied,
                  const OpfTolerances& tol) {
    double price = -std::numeric_limits<double>::infinity();
    for (int g : zone.generator_origin) {
        const auto& gen = applied.generators[static_cast<std::size_t>(g)];
        if (coupling.generation[static_cast<std::size_t>(g)] > tol.running) price = std::max(price, gen.marginal_cost);
    }
    if (std::isfinite(price)) return price;
    for (int b : zone.bus_origin) price = std::max(price, coupling.nodal_prices[static_cast<std::size_t>(b)]);
    return price;
}

}  // namespace

double redispatch_cost(std::span<const Generator> generators, std::span<const double> before,
                       std::span<const double> after) {
    if (before.size() != generators.size() || after.size() != generators.size())
        throw std::invalid_argument("redispatch_cost: dispatch size does not match generator count");
    double up = 0.0;
    double down = 0.0;
    for (std::size_t g = 0; g < generators.size(); ++g) {
        const double delta = after[g] - before[g];
        if (delta > 0.0)
            up += generators[g].marginal_cost * delta;
        else
            down += generators[g].marginal_cost * -delta;
    }
    return up - down;
}

CostBreakdown uniform_market_cost(const Network& network, const WindScenario& scenario,
                                  const WelfareConfig& config) {
    const Network applied = apply_scenario(network, scenario);
    OpfOptions market;
    market.enforce_limits = false;
    market.tol = config.tol;
    const DispatchSolution unconstrained = solve_or_throw(applied, market, "uniform market");
    OpfOptions physical;
    physical.tol = config.tol;
    const DispatchSolution constrained = solve_or_throw(applied, physical, "scenario unservable");

    CostBreakdown cost;
    cost.energy_value = generation_cost(applied.generators, unconstrained.generation);
    cost.balancing_cost = redispatch_cost(applied.generators, unconstrained.generation, constrained.generation);
    cost.congestion_rent = 0.0;
    cost.total = cost.energy_value + cost.balancing_cost - cost.congestion_rent;
    return cost;
}

ZonalSimulation simulate_zonal_market(const Network& applied, const Partition& partition,
                                      const WelfareConfig& config) {
    if (auto problems = partition_violations(partition, applied); !problems.empty())
        throw std::invalid_argument("simulate_zonal_market: " + problems.front());

    ZonalSimulation sim;
    OpfOptions coupling;
    coupling.tol = config.tol;
    for (const auto& br : applied.branches) {
        const bool inter = partition.zone_of[static_cast<std::size_t>(br.from_bus)] !=
                           partition.zone_of[static_cast<std::size_t>(br.to_bus)];
        if (inter)
            sim.inter_zonal_branches.push_back(br.id);
        else
            coupling.limit_overrides[br.id] = kUnlimited;
    }
    sim.coupling = solve_or_throw(applied, coupling, "market coupling");

    const auto members = zone_members(partition);
    sim.zones.reserve(members.size());
    for (const auto& m : members) sim.zones.push_back(induced_subnetwork(applied, m));

    CostBreakdown& cost = sim.cost;
    cost.zonal_prices.reserve(sim.zones.size());
    for (const auto& zone : sim.zones) cost.zonal_prices.push_back(zone_price(zone, sim.coupling, applied, config.tol));

    // Rent only accrues where an interconnector actually separates the markets.
    std::set<int> binding(sim.coupling.binding_lines.begin(), sim.coupling.binding_lines.end());
    for (int l : sim.inter_zonal_branches) {
        if (!binding.contains(l)) continue;
        const auto& br = applied.branches[static_cast<std::size_t>(l)];
        const double flow = sim.coupling.flows[static_cast<std::size_t>(l)];
        const double spread = cost.zonal_prices[static_cast<std::size_t>(partition.zone_of[static_cast<std::size_t>(br.to_bus)])] -
                              cost.zonal_prices[static_cast<std::size_t>(partition.zone_of[static_cast<std::size_t>(br.from_bus)])];
        cost.congestion_rent += std::max(0.0, flow * spread);
    }
    cost.energy_value = generation_cost(applied.generators, sim.coupling.generation) + cost.congestion_rent;

    // Local bus index of every bus inside its own zone.
    std::vector<int> local(applied.num_buses(), -1);
    for (const auto& zone : sim.zones)
        for (std::size_t i = 0; i < zone.bus_origin.size(); ++i) local[static_cast<std::size_t>(zone.bus_origin[i])] = static_cast<int>(i);

    sim.border_injection.resize(sim.zones.size());
    for (std::size_t z = 0; z < sim.zones.size(); ++z) sim.border_injection[z].assign(sim.zones[z].bus_origin.size(), 0.0);
    for (int l : sim.inter_zonal_branches) {
        const auto& br = applied.branches[static_cast<std::size_t>(l)];
        const double flow = sim.coupling.flows[static_cast<std::size_t>(l)];
        const auto from = static_cast<std::size_t>(br.from_bus);
        const auto to = static_cast<std::size_t>(br.to_bus);
        sim.border_injection[static_cast<std::size_t>(partition.zone_of[from])][static_cast<std::size_t>(local[from])] -= flow;
        sim.border_injection[static_cast<std::size_t>(partition.zone_of[to])][static_cast<std::size_t>(local[to])] += flow;
    }

    sim.zone_dispatch.reserve(sim.zones.size());
    for (std::size_t z = 0; z < sim.zones.size(); ++z) {
        const auto& zone = sim.zones[z];
        OpfOptions balancing;
        balancing.tol = config.tol;
        balancing.fixed_injection = sim.border_injection[z];
        sim.zone_dispatch.push_back(dc_opf(zone.network, balancing));
        const auto& sol = sim.zone_dispatch.back();
        if (!sol.feasible) {
            logger()->debug("zone {} balancing infeasible: {}", z, sol.diagnostic);
            cost.balancing_cost += config.infeasible_penalty;
            ++cost.infeasible_zones;
            continue;
        }
        std::vector<double> before;
        before.reserve(zone.generator_origin.size());
        for (int g : zone.generator_origin) before.push_back(sim.coupling.generation[static_cast<std::size_t>(g)]);
        cost.balancing_cost += redispatch_cost(zone.network.generators, before, sol.generation);
    }
    cost.total = cost.energy_value + cost.balancing_cost - cost.congestion_rent;
    return sim;
}

CostBreakdown zonal_market_cost(const Network& network, const Partition& partition,
                                const WindScenario& scenario, const WelfareConfig& config) {
    return simulate_zonal_market(apply_scenario(network, scenario), partition, config).cost;
}

WelfareEvaluator::WelfareEvaluator(const Network& network, const ScenarioSet& scenarios, WelfareConfig config)
    : network_(&network), config_(config) {
    std::vector<std::optional<Network>> applied(scenarios.size());
    parallel_for(scenarios.size(), config_.threads, [&](std::size_t s) {
        try {
            Network net = apply_scenario(network, scenarios.scenarios[s]);
            OpfOptions physical;
            physical.tol = config_.tol;
            if (dc_opf(net, physical).feasible) applied[s] = std::move(net);
        } catch (const InfeasibleError&) {
        }
    });
    for (std::size_t s = 0; s < applied.size(); ++s) {
        if (applied[s])
            servable_.push_back(std::move(*applied[s]));
        else {
            ++unservable_;
            logger()->debug("scenario {} unservable, excluded from welfare averages", scenarios.scenarios[s].id);
        }
    }
}

const std::vector<CostBreakdown>& WelfareEvaluator::per_scenario(const Partition& partition) {
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(partition.zone_of); it != cache_.end()) return *it->second;
    }
    if (partition.zone_of.size() != network_->num_buses())
        throw std::invalid_argument("partition size does not match bus count");
    auto costs = std::make_shared<std::vector<CostBreakdown>>(servable_.size());
    parallel_for(servable_.size(), config_.threads, [&](std::size_t s) {
        (*costs)[s] = simulate_zonal_market(servable_[s], partition, config_).cost;
    });
    std::lock_guard lock(mutex_);
    auto [it, inserted] = cache_.try_emplace(partition.zone_of, std::move(costs));
    return *it->second;
}

CandidateCost WelfareEvaluator::evaluate(const Partition& partition) {
    const auto& costs = per_scenario(partition);
    CandidateCost out;
    out.partition = partition;
    out.mean.zonal_prices.assign(static_cast<std::size_t>(partition.k), 0.0);
    for (const auto& c : costs) {
        out.mean.energy_value += c.energy_value;
        out.mean.balancing_cost += c.balancing_cost;
        out.mean.congestion_rent += c.congestion_rent;
        out.mean.total += c.total;
        out.mean.infeasible_zones += c.infeasible_zones;
        for (std::size_t z = 0; z < c.zonal_prices.size(); ++z) out.mean.zonal_prices[z] += c.zonal_prices[z];
        if (c.infeasible_zones > 0) ++out.infeasible_count;
    }
    if (!costs.empty()) {
        const double n = static_cast<double>(costs.size());
        out.mean.energy_value /= n;
        out.mean.balancing_cost /= n;
        out.mean.congestion_rent /= n;
        out.mean.total /= n;
        for (double& p : out.mean.zonal_prices) p /= n;
    }
    return out;
}

WelfareReport evaluate_divisions(const Network& network, const ScenarioSet& scenarios,
                                 std::vector<Partition> candidates, const WelfareConfig& config) {
    WelfareEvaluator evaluator(network, scenarios, config);
    return evaluate_divisions(evaluator, std::move(candidates));
}

WelfareReport evaluate_divisions(WelfareEvaluator& evaluator, std::vector<Partition> candidates) {
    if (evaluator.servable_scenarios() == 0) throw InfeasibleError("every scenario is unservable");

    std::vector<Partition> distinct;
    std::set<std::vector<int>> seen;
    const std::size_t n = candidates.empty() ? 0 : candidates.front().zone_of.size();
    for (const auto& c : candidates) {
        Partition p = make_partition(c.zone_of);
        if (seen.insert(p.zone_of).second) distinct.push_back(std::move(p));
    }
    if (distinct.empty()) throw std::invalid_argument("evaluate_divisions: no candidate partitions");
    Partition whole = single_zone(n);
    if (!seen.contains(whole.zone_of)) distinct.insert(distinct.begin(), whole);

    WelfareReport report;
    report.servable_scenarios = evaluator.servable_scenarios();
    report.unservable_scenarios = evaluator.unservable_scenarios();
    for (const auto& p : distinct) report.per_partition.push_back(evaluator.evaluate(p));

    for (std::size_t i = 1; i < report.per_partition.size(); ++i) {
        const auto& cand = report.per_partition[i];
        const auto& best = report.per_partition[report.best];
        if (cand.mean.total < best.mean.total ||
            (cand.mean.total == best.mean.total && cand.partition < best.partition))
            report.best = i;
    }
    return report;
}

std::string welfare_report_to_json(const WelfareReport& report) {
    nlohmann::ordered_json doc;
    doc["servable_scenarios"] = report.servable_scenarios;
    doc["unservable_scenarios"] = report.unservable_scenarios;
    doc["best"] = report.best;
    auto& list = doc["candidates"] = nlohmann::ordered_json::array();
    for (const auto& c : report.per_partition) {
        nlohmann::ordered_json item;
        item["k"] = c.partition.k;
        item["zone_of"] = c.partition.zone_of;
        item["energy_value"] = round12(c.mean.energy_value);
        item["balancing_cost"] = round12(c.mean.balancing_cost);
        item["congestion_rent"] = round12(c.mean.congestion_rent);
        item["total"] = round12(c.mean.total);
        auto& prices = item["zonal_prices"] = nlohmann::ordered_json::array();
        for (double p : c.mean.zonal_prices) prices.push_back(round12(p));
        item["infeasible_count"] = c.infeasible_count;
        list.push_back(std::move(item));
    }
    return doc.dump(2);
}

std::string welfare_report_to_csv(const WelfareReport& report, const std::string& method, bool header) {
    std::ostringstream out;
    const std::string lead = method.empty() ? "" : "method,";
    if (header) out << lead << "k,energy_value,balancing_cost,congestion_rent,total,infeasible_count\n";
    for (const auto& c : report.per_partition) {
        if (!method.empty()) out << method << ',';
        out << c.partition.k << ',' << format_number(c.mean.energy_value) << ','
            << format_number(c.mean.balancing_cost) << ',' << format_number(c.mean.congestion_rent) << ','
            << format_number(c.mean.total) << ',' << c.infeasible_count << '\n';
    }
    return out.str();
}

}  // namespace gridzones
