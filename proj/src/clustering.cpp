#include "gridzones/clustering.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

namespace gridzones {

Partition make_partition(std::span<const int> labels) {
    Partition p;
    p.zone_of.reserve(labels.size());
    std::map<int, int> canonical;
    for (int label : labels) {
        auto [it, inserted] = canonical.try_emplace(label, static_cast<int>(canonical.size()));
        p.zone_of.push_back(it->second);
    }
    p.k = static_cast<int>(canonical.size());
    return p;
}

Partition single_zone(std::size_t num_buses) { return Partition{std::vector<int>(num_buses, 0), num_buses ? 1 : 0}; }

std::vector<std::vector<int>> zone_members(const Partition& partition) {
    std::vector<std::vector<int>> zones(static_cast<std::size_t>(std::max(partition.k, 0)));
    for (std::size_t b = 0; b < partition.zone_of.size(); ++b) {
        const int z = partition.zone_of[b];
        if (z < 0 || z >= partition.k) throw std::invalid_argument(fmt::format("bus {} has zone {} outside 0..{}", b, z, partition.k - 1));
        zones[static_cast<std::size_t>(z)].push_back(static_cast<int>(b));
    }
    return zones;
}

std::vector<std::string> partition_violations(const Partition& partition, const Network& network) {
    std::vector<std::string> v;
    if (partition.zone_of.size() != network.buses.size()) {
        v.push_back(fmt::format("partition covers {} buses, network has {}", partition.zone_of.size(),
                                network.buses.size()));
        return v;
    }
    if (partition.k < 1) v.push_back(fmt::format("zone count {} must be at least 1", partition.k));
    for (std::size_t b = 0; b < partition.zone_of.size(); ++b)
        if (partition.zone_of[b] < 0 || partition.zone_of[b] >= partition.k)
            v.push_back(fmt::format("bus {} has zone {} outside 0..{}", b, partition.zone_of[b], partition.k - 1));
    if (!v.empty()) return v;
    auto zones = zone_members(partition);
    for (std::size_t z = 0; z < zones.size(); ++z) {
        if (zones[z].empty()) {
            v.push_back(fmt::format("zone {} is empty", z));
            continue;
        }
        auto comps = connected_components(network, zones[z]);
        if (comps.size() != 1) v.push_back(fmt::format("zone {} splits into {} disconnected parts", z, comps.size()));
    }
    return v;
}

Partition Dendrogram::cut(int k) const {
    if (k < 1 || k > num_items) throw std::invalid_argument(fmt::format("cannot cut {} items into {} zones", num_items, k));
    const auto needed = static_cast<std::size_t>(num_items - k);
    if (merges.size() < needed)
        throw std::logic_error(fmt::format("dendrogram stops at {} clusters; no mergeable pair left",
                                           num_items - static_cast<int>(merges.size())));
    std::vector<int> label(static_cast<std::size_t>(num_items));
    for (int i = 0; i < num_items; ++i) label[static_cast<std::size_t>(i)] = i;
    for (std::size_t s = 0; s < needed; ++s)
        for (auto& l : label)
            if (l == merges[s].b) l = merges[s].a;
    return make_partition(label);
}

Dendrogram agglomerate(const Eigen::MatrixXd& dissimilarity, const Network& network, Linkage linkage) {
    const auto n = static_cast<int>(network.buses.size());
    if (dissimilarity.rows() != n || dissimilarity.cols() != n)
        throw std::invalid_argument("agglomerate: dissimilarity matrix does not match bus count");

    Eigen::MatrixXd d = dissimilarity;
    std::vector<int> size(static_cast<std::size_t>(n), 1);
    std::vector<char> active(static_cast<std::size_t>(n), 1);
    std::vector<std::set<int>> nbr(static_cast<std::size_t>(n));
    for (const auto& br : network.branches) {
        if (br.from_bus == br.to_bus) continue;
        nbr[br.from_bus].insert(br.to_bus);
        nbr[br.to_bus].insert(br.from_bus);
    }

    Dendrogram dendro;
    dendro.num_items = n;
    for (int step = 0; step + 1 < n; ++step) {
        int best_a = -1, best_b = -1;
        double best = 0.0;
        for (int a = 0; a < n; ++a) {
            if (!active[a]) continue;
            for (int b : nbr[a]) {
                if (b <= a) continue;
                const double dab = d(a, b);
                if (best_a < 0 || dab < best - 1e-12 * (1.0 + std::abs(best))) {
                    best = dab;
                    best_a = a;
                    best_b = b;
                }
            }
        }
        if (best_a < 0) break;

        const int a = best_a, b = best_b;
        const double na = size[a], nb = size[b];
        for (int k = 0; k < n; ++k) {
            if (!active[k] || k == a || k == b) continue;
            const double nk = size[k];
            double updated;
            if (linkage == Linkage::ward)
                updated = ((na + nk) * d(a, k) + (nb + nk) * d(b, k) - nk * d(a, b)) / (na + nb + nk);
            else
                updated = (na * d(a, k) + nb * d(b, k)) / (na + nb);
            d(a, k) = d(k, a) = updated;
        }
        size[a] += size[b];
        active[b] = 0;
        for (int k : nbr[b]) {
            nbr[k].erase(b);
            if (k != a) {
                nbr[k].insert(a);
                nbr[a].insert(k);
            }
        }
        nbr[a].erase(b);
        nbr[b].clear();
        dendro.merges.push_back(Merge{a, b, best});
    }
    return dendro;
}

Partition ward_connectivity_cluster(std::span<const double> prices, const Network& network, int k) {
    const auto n = static_cast<int>(network.buses.size());
    if (static_cast<int>(prices.size()) != n)
        throw std::invalid_argument(fmt::format("ward_connectivity_cluster: {} prices for {} buses", prices.size(), n));
    if (k < 1 || k > n) throw std::invalid_argument(fmt::format("ward_connectivity_cluster: k = {} outside 1..{}", k, n));
    for (double p : prices)
        if (!std::isfinite(p)) throw std::invalid_argument("ward_connectivity_cluster: non-finite price");

    Eigen::MatrixXd d(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            const double diff = prices[static_cast<std::size_t>(i)] - prices[static_cast<std::size_t>(j)];
            d(i, j) = 0.5 * diff * diff;
        }
    return agglomerate(d, network, Linkage::ward).cut(k);
}

CoAssociationMatrix co_association(std::span<const Partition> partitions) {
    if (partitions.empty()) throw std::invalid_argument("co_association: no partitions");
    const auto n = static_cast<Eigen::Index>(partitions.front().zone_of.size());
    Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
    for (const auto& p : partitions) {
        if (static_cast<Eigen::Index>(p.zone_of.size()) != n)
            throw std::invalid_argument("co_association: partitions cover different bus counts");
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < n; ++j)
                if (p.zone_of[static_cast<std::size_t>(i)] == p.zone_of[static_cast<std::size_t>(j)]) counts(i, j) += 1.0;
    }
    return CoAssociationMatrix{counts / static_cast<double>(partitions.size())};
}

std::vector<Partition> consensus_cluster(std::span<const Partition> partitions, const Network& network, int max_k) {
    const auto n = static_cast<int>(network.buses.size());
    if (max_k < 1 || max_k > n) throw std::invalid_argument(fmt::format("consensus_cluster: K = {} outside 1..{}", max_k, n));
    const auto co = co_association(partitions);
    if (co.values.rows() != n) throw std::invalid_argument("consensus_cluster: partitions do not match the network");
    const Eigen::MatrixXd dissimilarity = Eigen::MatrixXd::Ones(n, n) - co.values;
    const auto dendro = agglomerate(dissimilarity, network, Linkage::average);
    std::vector<Partition> out;
    for (int k = 1; k <= max_k; ++k) out.push_back(dendro.cut(k));
    return out;
}

std::string partition_to_json(const Partition& partition) {
    nlohmann::json j = {{"k", partition.k}, {"zone_of", partition.zone_of}};
    return j.dump() + "\n";
}

std::string partition_to_dot(const Partition& partition, const Network& network, const std::string& graph_name) {
    static constexpr std::array<const char*, 12> palette = {
        "#8dd3c7", "#ffffb3", "#bebada", "#fb8072", "#80b1d3", "#fdb462",
        "#b3de69", "#fccde5", "#d9d9d9", "#bc80bd", "#ccebc5", "#ffed6f"};
    std::ostringstream out;
    out << "graph \"" << graph_name << "\" {\n";
    out << "  node [style=filled, shape=circle];\n";
    for (std::size_t b = 0; b < network.buses.size(); ++b) {
        const int z = b < partition.zone_of.size() ? partition.zone_of[b] : 0;
        out << "  " << b << " [label=\"" << network.buses[b].label << "\", fillcolor=\""
            << palette[static_cast<std::size_t>(z) % palette.size()] << "\", zone=" << z << "];\n";
    }
    for (const auto& br : network.branches) {
        const bool border = partition.zone_of.at(static_cast<std::size_t>(br.from_bus)) !=
                            partition.zone_of.at(static_cast<std::size_t>(br.to_bus));
        out << "  " << br.from_bus << " -- " << br.to_bus;
        if (border) out << " [style=dashed, color=red]";
        out << ";\n";
    }
    out << "}\n";
    return out.str();
}

}  // namespace gridzones
