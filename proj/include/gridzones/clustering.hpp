#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridzones/grid.hpp"

namespace gridzones {

/// Zone assignment per bus. Zones are numbered 0..k-1 in order of first
/// appearance by bus index, so equal divisions compare equal.
struct Partition {
    std::vector<int> zone_of;
    int k = 0;

    friend bool operator==(const Partition&, const Partition&) = default;
    friend auto operator<=>(const Partition& a, const Partition& b) {
        if (auto c = a.k <=> b.k; c != 0) return c;
        return a.zone_of <=> b.zone_of;
    }
};

/// Relabels arbitrary zone labels into canonical form.
Partition make_partition(std::span<const int> labels);

Partition single_zone(std::size_t num_buses);

/// Bus indices of each zone, ascending.
std::vector<std::vector<int>> zone_members(const Partition& partition);

/// Problems with the partition (labels, coverage, contiguity); empty when valid.
std::vector<std::string> partition_violations(const Partition& partition, const Network& network);

inline bool is_contiguous(const Partition& partition, const Network& network) {
    return partition_violations(partition, network).empty();
}

enum class Linkage { ward, average };

struct Merge {
    int a = 0;  // surviving cluster id (the smaller)
    int b = 0;  // absorbed cluster id
    double height = 0.0;
};

/// Connectivity-constrained agglomeration history. Cluster ids are the bus
/// index of the cluster's first member.
struct Dendrogram {
    int num_items = 0;
    std::vector<Merge> merges;

    /// Partition after num_items - k merges.
    Partition cut(int k) const;
};

/// Agglomerates singletons, merging at each step the branch-adjacent cluster
/// pair with the smallest dissimilarity (Lance-Williams updates for the chosen
/// linkage). Ties go to the lexicographically smallest (id, id) pair.
/// For Linkage::ward, `dissimilarity` must hold half squared distances so
/// merge heights equal the Ward increase in within-cluster sum of squares.
Dendrogram agglomerate(const Eigen::MatrixXd& dissimilarity, const Network& network,
                       Linkage linkage);

/// Ward clustering of nodal prices restricted to branch-connected merges.
Partition ward_connectivity_cluster(std::span<const double> prices, const Network& network, int k);

struct CoAssociationMatrix {
    Eigen::MatrixXd values;  // share of partitions placing i and j together
};

CoAssociationMatrix co_association(std::span<const Partition> partitions);

/// Average-linkage agglomeration on 1 - co-association; one partition per
/// k = 1..max_k.
std::vector<Partition> consensus_cluster(std::span<const Partition> partitions,
                                         const Network& network, int max_k);

std::string partition_to_json(const Partition& partition);

/// Undirected DOT graph, buses filled by zone colour.
std::string partition_to_dot(const Partition& partition, const Network& network,
                             const std::string& graph_name = "zones");

}  // namespace gridzones
