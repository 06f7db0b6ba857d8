#pragma once

// Fixtures and independent oracles shared by the unit and acceptance suites.
// The oracles deliberately avoid the library's own solvers: flows come from a
// direct full-network angle solve, dispatch from exhaustive enumeration.

#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridzones/case_io.hpp"
#include "gridzones/clustering.hpp"
#include "gridzones/grid.hpp"

namespace fixtures {

using namespace gridzones;

inline std::string data_path(const std::string& name) { return std::string(GRIDZONES_DATA_DIR) + "/" + name; }

inline Network make_network(int n, const std::vector<std::pair<int, int>>& lines, double reactance = 0.1) {
    Network net;
    for (int i = 0; i < n; ++i) net.buses.push_back({i, 0.0, std::to_string(i)});
    for (std::size_t l = 0; l < lines.size(); ++l)
        net.branches.push_back({static_cast<int>(l), lines[l].first, lines[l].second, reactance, kUnlimited});
    return net;
}

/// Gen A at bus 0 (10/MWh, 100 MW), gen B at bus 1 (30/MWh, 100 MW),
/// 80 MW demand at bus 1, one 50 MW line.
inline Network two_bus(double limit = 50.0) {
    Network net = make_network(2, {{0, 1}});
    net.buses[1].demand = 80.0;
    net.branches[0].flow_limit = limit;
    net.generators.push_back({0, 10.0, 0.0, 100.0, false, 0.0, "GA"});
    net.generators.push_back({1, 30.0, 0.0, 100.0, false, 0.0, "GB"});
    return net;
}

inline Network triangle() { return make_network(3, {{0, 1}, {1, 2}, {0, 2}}); }

inline Network path_network(int n) {
    std::vector<std::pair<int, int>> lines;
    for (int i = 0; i + 1 < n; ++i) lines.push_back({i, i + 1});
    return make_network(n, lines);
}

/// Random spanning tree plus extra chords, random reactances.
inline Network random_connected(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> x(0.02, 0.5);
    std::vector<std::pair<int, int>> lines;
    for (int i = 1; i < n; ++i) lines.push_back({static_cast<int>(rng() % static_cast<unsigned>(i)), i});
    const int extra = static_cast<int>(rng() % static_cast<unsigned>(n));
    for (int e = 0; e < extra; ++e) {
        const int a = static_cast<int>(rng() % static_cast<unsigned>(n));
        const int b = static_cast<int>(rng() % static_cast<unsigned>(n));
        if (a != b) lines.push_back({a, b});
    }
    // Random orientation so from/to ordering is not always ascending.
    for (auto& [a, b] : lines)
        if (rng() % 2) std::swap(a, b);
    Network net = make_network(n, lines);
    for (auto& br : net.branches) br.reactance = x(rng);
    return net;
}

inline Eigen::VectorXd random_balanced(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> u(-100.0, 100.0);
    Eigen::VectorXd p(n);
    for (int i = 0; i < n; ++i) p[i] = u(rng);
    p.array() -= p.mean();
    return p;
}

/// Branch flows (MW) for a balanced injection: build the nodal susceptance
/// matrix entry by entry, ground bus `slack`, solve for angles with a full
/// pivoting LU, then f = b (theta_from - theta_to).
inline Eigen::VectorXd btheta_flows(const Network& net, const Eigen::VectorXd& p, int slack = 0) {
    const int n = static_cast<int>(net.num_buses());
    Eigen::MatrixXd bbus = Eigen::MatrixXd::Zero(n, n);
    for (const auto& br : net.branches) {
        const double b = net.base_mva / br.reactance;
        bbus(br.from_bus, br.from_bus) += b;
        bbus(br.to_bus, br.to_bus) += b;
        bbus(br.from_bus, br.to_bus) -= b;
        bbus(br.to_bus, br.from_bus) -= b;
    }
    Eigen::MatrixXd reduced(n - 1, n - 1);
    Eigen::VectorXd rhs(n - 1);
    for (int i = 0, ri = 0; i < n; ++i) {
        if (i == slack) continue;
        rhs[ri] = p[i];
        for (int j = 0, rj = 0; j < n; ++j) {
            if (j == slack) continue;
            reduced(ri, rj++) = bbus(i, j);
        }
        ++ri;
    }
    const Eigen::VectorXd reduced_theta = reduced.fullPivLu().solve(rhs);
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(n);
    for (int i = 0, ri = 0; i < n; ++i)
        if (i != slack) theta[i] = reduced_theta[ri++];
    Eigen::VectorXd f(net.num_branches());
    for (const auto& br : net.branches)
        f[br.id] = net.base_mva / br.reactance * (theta[br.from_bus] - theta[br.to_bus]);
    return f;
}

struct BruteForceDispatch {
    std::vector<double> generation;
    double cost = std::numeric_limits<double>::infinity();
};

/// Cheapest dispatch on a `step` MW grid that balances demand, respects unit
/// bounds and (when enforce_limits) every flow limit, flows from btheta_flows.
/// The last unit takes the balancing remainder.
inline std::optional<BruteForceDispatch> brute_force_dispatch(const Network& net, bool enforce_limits,
                                                              double step = 1.0) {
    const std::size_t g_count = net.generators.size();
    const double demand = net.total_demand();
    std::vector<double> p(g_count, 0.0);
    std::optional<BruteForceDispatch> best;
    std::function<void(std::size_t, double)> rec = [&](std::size_t g, double assigned) {
        if (g + 1 == g_count) {
            const double last = demand - assigned;
            const auto& gen = net.generators[g];
            if (last < gen.p_min - 1e-9 || last > gen.p_max + 1e-9) return;
            p[g] = last;
            Eigen::VectorXd inj = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(net.num_buses()));
            for (const auto& b : net.buses) inj[b.id] -= b.demand;
            for (std::size_t k = 0; k < g_count; ++k) inj[net.generators[k].bus] += p[k];
            if (enforce_limits) {
                const Eigen::VectorXd f = btheta_flows(net, inj);
                for (const auto& br : net.branches)
                    if (std::abs(f[br.id]) > br.flow_limit + 1e-7) return;
            }
            double cost = 0.0;
            for (std::size_t k = 0; k < g_count; ++k) cost += net.generators[k].marginal_cost * p[k];
            if (!best || cost < best->cost) best = BruteForceDispatch{p, cost};
            return;
        }
        const auto& gen = net.generators[g];
        for (double v = std::ceil(gen.p_min / step) * step; v <= gen.p_max + 1e-9; v += step) {
            p[g] = v;
            rec(g + 1, assigned + v);
        }
    };
    if (g_count > 0) rec(0, 0.0);
    return best;
}

/// Within-cluster sum of squared deviations from cluster means.
inline double within_ss(const std::vector<double>& values, const Partition& p) {
    double total = 0.0;
    for (const auto& members : zone_members(p)) {
        double mean = 0.0;
        for (int i : members) mean += values[static_cast<std::size_t>(i)];
        mean /= static_cast<double>(members.size());
        for (int i : members) total += std::pow(values[static_cast<std::size_t>(i)] - mean, 2);
    }
    return total;
}

/// Every 2-partition of the buses whose two sides both induce connected
/// subgraphs, by subset enumeration (bus 0 fixed in zone 0).
inline std::vector<Partition> connected_bipartitions(const Network& net) {
    const int n = static_cast<int>(net.num_buses());
    std::vector<Partition> out;
    for (unsigned mask = 1; mask < (1u << (n - 1)); ++mask) {
        std::vector<int> labels(static_cast<std::size_t>(n), 0);
        std::vector<int> a{0}, b;
        for (int i = 1; i < n; ++i) {
            if (mask & (1u << (i - 1))) {
                labels[static_cast<std::size_t>(i)] = 1;
                b.push_back(i);
            } else {
                a.push_back(i);
            }
        }
        if (induces_connected_subgraph(net, a) && induces_connected_subgraph(net, b))
            out.push_back(make_partition(labels));
    }
    return out;
}

}  // namespace fixtures
