#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include <nlohmann/json.hpp>

#include "fixtures.hpp"
#include "gridzones/clustering.hpp"

using namespace gridzones;

namespace {

std::vector<int> labels(std::initializer_list<int> l) { return std::vector<int>(l); }

}  // namespace

TEST_CASE("partitions are canonical") {
    const auto p = make_partition(labels({7, 7, 2, 9, 2}));
    CHECK(p.k == 3);
    CHECK(p.zone_of == labels({0, 0, 1, 2, 1}));
    CHECK(make_partition(labels({1, 0})) == make_partition(labels({0, 1})));
    CHECK(single_zone(3).zone_of == labels({0, 0, 0}));
    CHECK(zone_members(p) == std::vector<std::vector<int>>{{0, 1}, {2, 4}, {3}});

    const Network path = fixtures::path_network(4);
    CHECK(is_contiguous(make_partition(labels({0, 0, 1, 1})), path));
    // Zone {0, 3} is not connected on the path.
    CHECK_FALSE(partition_violations(make_partition(labels({0, 1, 1, 0})), path).empty());
    CHECK_FALSE(partition_violations(make_partition(labels({0, 0, 1})), path).empty());
}

TEST_CASE("Ward clustering basics") {
    const Network path = fixtures::path_network(4);
    const std::vector<double> prices{10, 10, 30, 30};
    CHECK(ward_connectivity_cluster(prices, path, 1) == single_zone(4));
    CHECK(ward_connectivity_cluster(prices, path, 4).k == 4);
    CHECK(ward_connectivity_cluster(prices, path, 2).zone_of == labels({0, 0, 1, 1}));
    CHECK_THROWS_AS(ward_connectivity_cluster(prices, path, 5), std::invalid_argument);
    CHECK_THROWS_AS(ward_connectivity_cluster(prices, path, 0), std::invalid_argument);
    const std::vector<double> bad{10, NAN, 30, 30};
    CHECK_THROWS_AS(ward_connectivity_cluster(bad, path, 2), std::invalid_argument);
}

TEST_CASE("connectivity constraint overrides price similarity") {
    // Buses 0 and 3 share a price but only meet through 1 and 2.
    const Network path = fixtures::path_network(4);
    const std::vector<double> prices{10, 50, 51, 10};
    const auto p = ward_connectivity_cluster(prices, path, 3);
    CHECK(is_contiguous(p, path));
    CHECK(p.zone_of == labels({0, 1, 1, 2}));
}

TEST_CASE("Ward merge heights equal the rise in within-cluster sum of squares") {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 30; ++trial) {
        const Network net = fixtures::random_connected(rng, 3 + trial % 10);
        const int n = static_cast<int>(net.num_buses());
        std::vector<double> prices(static_cast<std::size_t>(n));
        for (auto& p : prices) p = u(rng);
        Eigen::MatrixXd d(n, n);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) d(i, j) = 0.5 * std::pow(prices[i] - prices[j], 2);
        const auto dendro = agglomerate(d, net, Linkage::ward);
        REQUIRE(static_cast<int>(dendro.merges.size()) == n - 1);
        double previous = 0.0;
        for (int k = n - 1; k >= 1; --k) {
            const double ss = fixtures::within_ss(prices, dendro.cut(k));
            CHECK(ss - previous == doctest::Approx(dendro.merges[static_cast<std::size_t>(n - 1 - k)].height));
            previous = ss;
            CHECK(is_contiguous(dendro.cut(k), net));
            CHECK(dendro.cut(k) == ward_connectivity_cluster(prices, net, k));
        }
    }
}

TEST_CASE("property: Ward k=2 on two-plateau paths matches exhaustive search") {
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> noise(-1.0, 1.0), level(0.0, 100.0);
    int checked = 0;
    for (int n = 2; n <= 8; ++n) {
        const Network path = fixtures::path_network(n);
        const auto candidates = fixtures::connected_bipartitions(path);
        for (int cut = 1; cut < n; ++cut) {
            for (int rep = 0; rep < 5; ++rep) {
                const double low = level(rng), high = low + 20.0 + level(rng);
                std::vector<double> prices(static_cast<std::size_t>(n));
                for (int i = 0; i < n; ++i) prices[i] = (i < cut ? low : high) + noise(rng);
                if (rep % 2) std::reverse(prices.begin(), prices.end());
                double best = INFINITY;
                for (const auto& c : candidates) best = std::min(best, fixtures::within_ss(prices, c));
                const auto ward = ward_connectivity_cluster(prices, path, 2);
                CAPTURE(n);
                CAPTURE(cut);
                CHECK(ward.k == 2);
                CHECK(fixtures::within_ss(prices, ward) == doctest::Approx(best).epsilon(1e-12));
                ++checked;
            }
        }
    }
    CHECK(checked == 5 * 28);
}

TEST_CASE("property: affine price changes keep the partition") {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 30; ++trial) {
        const Network net = fixtures::random_connected(rng, 4 + trial % 8);
        std::vector<double> prices(net.num_buses()), scaled(net.num_buses());
        for (std::size_t i = 0; i < prices.size(); ++i) {
            prices[i] = std::round(u(rng));
            scaled[i] = 4.0 * prices[i] - 17.0;
        }
        for (int k = 1; k <= static_cast<int>(net.num_buses()); ++k)
            CHECK(ward_connectivity_cluster(prices, net, k) == ward_connectivity_cluster(scaled, net, k));
    }
}

TEST_CASE("co-association") {
    const std::vector<Partition> one{make_partition(labels({0, 0, 1}))};
    auto co = co_association(one).values;
    CHECK(co(0, 1) == 1.0);
    CHECK(co(0, 2) == 0.0);
    CHECK(co(2, 2) == 1.0);

    const std::vector<Partition> two{make_partition(labels({0, 0, 1})), make_partition(labels({0, 1, 1}))};
    co = co_association(two).values;
    CHECK(co(0, 1) == 0.5);
    CHECK(co(1, 2) == 0.5);
    CHECK(co(0, 2) == 0.0);
    CHECK(co == co.transpose());

    const std::vector<Partition> same{one[0], one[0]};
    CHECK(co_association(same).values == co_association(one).values);

    const std::vector<Partition> mismatched{one[0], single_zone(4)};
    CHECK_THROWS_AS(co_association(mismatched), std::invalid_argument);
    CHECK_THROWS_AS(co_association(std::vector<Partition>{}), std::invalid_argument);
}

TEST_CASE("consensus clustering") {
    const Network tri = fixtures::triangle();
    const std::vector<Partition> two{make_partition(labels({0, 0, 1})), make_partition(labels({0, 1, 1}))};
    const auto cuts = consensus_cluster(two, tri, 3);
    REQUIRE(cuts.size() == 3);
    CHECK(cuts[0] == single_zone(3));
    // d(0,1) = d(1,2) = 0.5 tie; the smaller pair (0, 1) merges first.
    CHECK(cuts[1].zone_of == labels({0, 0, 1}));
    CHECK(cuts[2].k == 3);
    CHECK_THROWS_AS(consensus_cluster(two, tri, 4), std::invalid_argument);

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 100.0);
    for (int trial = 0; trial < 25; ++trial) {
        const Network net = fixtures::random_connected(rng, 3 + trial % 10);
        const int n = static_cast<int>(net.num_buses());
        std::vector<double> prices(static_cast<std::size_t>(n));
        for (auto& p : prices) p = u(rng);
        const int k0 = 1 + trial % n;
        const auto base = ward_connectivity_cluster(prices, net, k0);
        const std::vector<Partition> copies(4, base);
        const auto consensus = consensus_cluster(copies, net, n);
        CHECK(consensus[static_cast<std::size_t>(k0 - 1)] == base);
        for (int k = 1; k <= n; ++k) {
            CHECK(consensus[static_cast<std::size_t>(k - 1)].k == k);
            CHECK(is_contiguous(consensus[static_cast<std::size_t>(k - 1)], net));
        }
    }
}

TEST_CASE("partition output") {
    const Network path = fixtures::path_network(3);
    const auto p = make_partition(labels({0, 0, 1}));
    const auto doc = nlohmann::json::parse(partition_to_json(p));
    CHECK(doc["k"] == 2);
    CHECK(doc["zone_of"] == nlohmann::json::array({0, 0, 1}));

    const auto dot = partition_to_dot(p, path);
    CHECK(dot.rfind("graph \"zones\" {", 0) == 0);
    CHECK(dot.find("0 -- 1;") != std::string::npos);
    CHECK(dot.find("1 -- 2 [style=dashed, color=red];") != std::string::npos);
    CHECK(dot.find("zone=1") != std::string::npos);
}
