#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace gridzones {

/// Flow limit sentinel for branches without a thermal rating.
inline constexpr double kUnlimited = std::numeric_limits<double>::infinity();

struct Bus {
    int id = 0;
    double demand = 0.0;  // MW
    std::string label;    // original bus number for MATPOWER input
};

/// Positive flow runs from_bus -> to_bus.
struct Branch {
    int id = 0;
    int from_bus = 0;
    int to_bus = 0;
    double reactance = 0.0;  // p.u.
    double flow_limit = kUnlimited;  // MW
};

struct Generator {
    int bus = 0;
    double marginal_cost = 0.0;  // currency/MWh
    double p_min = 0.0;
    double p_max = 0.0;
    bool is_wind = false;
    double rated_capacity = 0.0;  // nameplate, wind units only
    std::string label;
};

struct Network {
    std::vector<Bus> buses;
    std::vector<Branch> branches;
    std::vector<Generator> generators;
    double base_mva = 100.0;

    std::size_t num_buses() const noexcept { return buses.size(); }
    std::size_t num_branches() const noexcept { return branches.size(); }
    double total_demand() const;
    /// Indices into `generators` of the wind units, in generator order.
    std::vector<int> wind_generators() const;
};

/// Every broken invariant, as human-readable text. Empty iff the network is valid.
std::vector<std::string> validate(const Network& network);

/// Throws ValidationError if validate() reports anything.
void require_valid(const Network& network);

/// M x N signed incidence: +1 at from_bus, -1 at to_bus.
Eigen::MatrixXd incidence_matrix(const Network& network);

/// Undirected bus adjacency lists (parallel branches appear once per branch).
std::vector<std::vector<int>> bus_adjacency(const Network& network);

/// Connected components of the subgraph induced by `subset` (all buses when
/// empty). Components and their members are sorted ascending.
std::vector<std::vector<int>> connected_components(const Network& network,
                                                   std::span<const int> subset = {});

bool induces_connected_subgraph(const Network& network, std::span<const int> buses);

/// Network restricted to a bus subset. Buses keep their relative order; the
/// origin vectors map local indices back to the parent network.
struct Subnetwork {
    Network network;
    std::vector<int> bus_origin;
    std::vector<int> branch_origin;
    std::vector<int> generator_origin;
};

Subnetwork induced_subnetwork(const Network& network, std::span<const int> buses);

}  // namespace gridzones
