#include "gridzones/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>

#include <fmt/format.h>
#include <fmt/ranges.h>

#include "gridzones/errors.hpp"

namespace gridzones {

double Network::total_demand() const {
    double total = 0.0;
    for (const auto& bus : buses) total += bus.demand;
    return total;
}

std::vector<int> Network::wind_generators() const {
    std::vector<int> out;
    for (std::size_t g = 0; g < generators.size(); ++g)
        if (generators[g].is_wind) out.push_back(static_cast<int>(g));
    return out;
}

std::vector<std::string> validate(const Network& network) {
    std::vector<std::string> v;
    const int n = static_cast<int>(network.buses.size());
    if (n == 0) v.emplace_back("network has no buses");
    if (!(network.base_mva > 0.0) || !std::isfinite(network.base_mva))
        v.push_back(fmt::format("base_mva must be positive, got {}", network.base_mva));

    for (int i = 0; i < n; ++i) {
        const auto& bus = network.buses[i];
        if (bus.id != i) v.push_back(fmt::format("bus {} has id {} (ids must be 0..N-1 in order)", i, bus.id));
        if (!std::isfinite(bus.demand) || bus.demand < 0.0)
            v.push_back(fmt::format("bus {} demand {} must be finite and non-negative", i, bus.demand));
    }

    bool endpoints_ok = true;
    for (std::size_t l = 0; l < network.branches.size(); ++l) {
        const auto& br = network.branches[l];
        if (br.id != static_cast<int>(l)) v.push_back(fmt::format("branch {} has id {}", l, br.id));
        if (br.from_bus < 0 || br.from_bus >= n || br.to_bus < 0 || br.to_bus >= n) {
            v.push_back(fmt::format("branch {} endpoint out of range ({} -> {})", l, br.from_bus, br.to_bus));
            endpoints_ok = false;
        } else if (br.from_bus == br.to_bus) {
            v.push_back(fmt::format("branch {} is a self-loop at bus {}", l, br.from_bus));
        }
        if (!(br.reactance > 0.0) || !std::isfinite(br.reactance))
            v.push_back(fmt::format("branch {} reactance {} must be positive", l, br.reactance));
        if (!(br.flow_limit > 0.0))
            v.push_back(fmt::format("branch {} flow limit {} must be positive", l, br.flow_limit));
    }

    if (network.generators.empty()) v.emplace_back("network has no generators");
    for (std::size_t g = 0; g < network.generators.size(); ++g) {
        const auto& gen = network.generators[g];
        if (gen.bus < 0 || gen.bus >= n) v.push_back(fmt::format("generator {} at unknown bus {}", g, gen.bus));
        if (!std::isfinite(gen.marginal_cost) || gen.marginal_cost < 0.0)
            v.push_back(fmt::format("generator {} marginal cost {} must be finite and non-negative", g,
                                    gen.marginal_cost));
        if (!(gen.p_min >= 0.0) || !(gen.p_min <= gen.p_max) || !std::isfinite(gen.p_max))
            v.push_back(fmt::format("generator {} bounds [{}, {}] invalid", g, gen.p_min, gen.p_max));
        if (gen.is_wind && gen.p_min != 0.0) v.push_back(fmt::format("wind generator {} must have p_min 0", g));
        if (gen.is_wind && !(gen.rated_capacity >= 0.0))
            v.push_back(fmt::format("wind generator {} rated capacity {} invalid", g, gen.rated_capacity));
    }

    if (n > 0 && endpoints_ok) {
        auto comps = connected_components(network);
        if (comps.size() > 1) {
            std::vector<std::string> parts;
            for (const auto& c : comps) parts.push_back(fmt::format("{{{}}}", fmt::join(c, ",")));
            v.push_back(fmt::format("network is disconnected: {} components {}", comps.size(),
                                    fmt::join(parts, " ")));
        }
    }
    return v;
}

void require_valid(const Network& network) {
    auto violations = validate(network);
    if (!violations.empty()) throw ValidationError(std::move(violations));
}

Eigen::MatrixXd incidence_matrix(const Network& network) {
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(network.branches.size()),
                                              static_cast<Eigen::Index>(network.buses.size()));
    for (std::size_t l = 0; l < network.branches.size(); ++l) {
        a(static_cast<Eigen::Index>(l), network.branches[l].from_bus) = 1.0;
        a(static_cast<Eigen::Index>(l), network.branches[l].to_bus) = -1.0;
    }
    return a;
}

std::vector<std::vector<int>> bus_adjacency(const Network& network) {
    std::vector<std::vector<int>> adj(network.buses.size());
    for (const auto& br : network.branches) {
        adj[br.from_bus].push_back(br.to_bus);
        adj[br.to_bus].push_back(br.from_bus);
    }
    return adj;
}

std::vector<std::vector<int>> connected_components(const Network& network, std::span<const int> subset) {
    const std::size_t n = network.buses.size();
    std::vector<char> inside(n, subset.empty() ? 1 : 0);
    for (int b : subset) inside.at(static_cast<std::size_t>(b)) = 1;

    const auto adj = bus_adjacency(network);
    std::vector<char> seen(n, 0);
    std::vector<std::vector<int>> comps;
    for (std::size_t start = 0; start < n; ++start) {
        if (!inside[start] || seen[start]) continue;
        std::vector<int> comp;
        std::queue<int> q;
        q.push(static_cast<int>(start));
        seen[start] = 1;
        while (!q.empty()) {
            int u = q.front();
            q.pop();
            comp.push_back(u);
            for (int w : adj[u])
                if (inside[w] && !seen[w]) {
                    seen[w] = 1;
                    q.push(w);
                }
        }
        std::sort(comp.begin(), comp.end());
        comps.push_back(std::move(comp));
    }
    return comps;
}

bool induces_connected_subgraph(const Network& network, std::span<const int> buses) {
    if (buses.empty()) return false;
    return connected_components(network, buses).size() == 1;
}

Subnetwork induced_subnetwork(const Network& network, std::span<const int> buses) {
    std::vector<int> sorted(buses.begin(), buses.end());
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());

    std::vector<int> local(network.buses.size(), -1);
    Subnetwork sub;
    sub.network.base_mva = network.base_mva;
    for (int b : sorted) {
        local.at(static_cast<std::size_t>(b)) = static_cast<int>(sub.bus_origin.size());
        Bus bus = network.buses[b];
        bus.id = local[b];
        sub.network.buses.push_back(std::move(bus));
        sub.bus_origin.push_back(b);
    }
    for (std::size_t l = 0; l < network.branches.size(); ++l) {
        const auto& br = network.branches[l];
        if (local[br.from_bus] < 0 || local[br.to_bus] < 0) continue;
        Branch copy = br;
        copy.id = static_cast<int>(sub.branch_origin.size());
        copy.from_bus = local[br.from_bus];
        copy.to_bus = local[br.to_bus];
        sub.network.branches.push_back(copy);
        sub.branch_origin.push_back(static_cast<int>(l));
    }
    for (std::size_t g = 0; g < network.generators.size(); ++g) {
        const auto& gen = network.generators[g];
        if (local[gen.bus] < 0) continue;
        Generator copy = gen;
        copy.bus = local[gen.bus];
        sub.network.generators.push_back(std::move(copy));
        sub.generator_origin.push_back(static_cast<int>(g));
    }
    return sub;
}

}  // namespace gridzones
