#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "fixtures.hpp"
#include "gridzones/errors.hpp"
#include "gridzones/ptdf.hpp"

using namespace gridzones;

namespace {

std::vector<int> all_buses(const Network& net) {
    std::vector<int> v(net.num_buses());
    std::iota(v.begin(), v.end(), 0);
    return v;
}

}  // namespace

TEST_CASE("2-bus PTDF and its generalized form") {
    const Network net = fixtures::make_network(2, {{0, 1}});
    const auto h = ptdf_matrix(net, 1);
    CHECK(h.values(0, 0) == doctest::Approx(1.0));
    CHECK(h.values(0, 1) == 0.0);

    const auto s = generalized_ptdf(h, net);
    CHECK(s.values(0, 0) == doctest::Approx(0.5));
    CHECK(s.values(0, 1) == doctest::Approx(-0.5));

    Eigen::VectorXd p(2);
    p << 80, -80;
    CHECK(flows_from_injections(h, p)[0] == doctest::Approx(80.0));
    CHECK(flows_from_injections(s, p)[0] == doctest::Approx(80.0));
    CHECK_THROWS_AS(flows_from_injections(h, Eigen::VectorXd::Zero(3)), std::invalid_argument);

    const auto split = sign_bipartition(s, 0, all_buses(net), net);
    CHECK(split.zone_plus == std::vector<int>{0});
    CHECK(split.zone_minus == std::vector<int>{1});
}

TEST_CASE("triangle with equal reactances") {
    // Injecting at 0 and withdrawing at 2 sends 2/3 over the direct line and
    // 1/3 around through bus 1; injecting at 1 sends -1/3 over line 0->1.
    const Network net = fixtures::triangle();
    const auto h = ptdf_matrix(net, 2);
    CHECK(h.values(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(h.values(0, 1) == doctest::Approx(-1.0 / 3.0));
    CHECK(h.values(0, 2) == 0.0);

    // The end factors are already antisymmetric, so the shift is zero.
    const auto s = generalized_ptdf(h, net);
    CHECK(s.values(0, 0) == doctest::Approx(1.0 / 3.0));
    CHECK(s.values(0, 1) == doctest::Approx(-1.0 / 3.0));
    CHECK(std::abs(s.values(0, 2)) <= 1e-12);

    // Bus 2 has a zero coefficient and goes with the from side.
    const auto split = sign_bipartition(s, 0, all_buses(net), net);
    CHECK(split.zone_plus == std::vector<int>{0, 2});
    CHECK(split.zone_minus == std::vector<int>{1});

    std::mt19937_64 rng(5);
    for (int t = 0; t < 20; ++t) {
        const Eigen::VectorXd p = fixtures::random_balanced(rng, 3);
        const Eigen::VectorXd oracle = fixtures::btheta_flows(net, p);
        CHECK((flows_from_injections(s, p) - oracle).lpNorm<Eigen::Infinity>() <= 1e-9 * p.lpNorm<Eigen::Infinity>());
    }
}

TEST_CASE("row shift with end factors 0.7 and -0.2") {
    // Four buses, line 0 runs 1 -> 2; the row is supplied directly.
    const Network net = fixtures::make_network(4, {{1, 2}, {0, 1}, {2, 3}});
    PtdfMatrix h;
    h.values = Eigen::MatrixXd::Zero(3, 4);
    h.values.row(0) << 0.1, 0.7, -0.2, 0.3;
    const auto s = generalized_ptdf(h, net);
    CHECK(std::abs(s.values(0, 1) - 0.45) <= 1e-12);
    CHECK(std::abs(s.values(0, 2) + 0.45) <= 1e-12);
    CHECK(std::abs(s.values(0, 0) - (0.1 - 0.25)) <= 1e-12);
    CHECK(std::abs(s.values(0, 3) - (0.3 - 0.25)) <= 1e-12);
}

TEST_CASE("path graph splits on the middle line") {
    const Network net = fixtures::path_network(4);
    const auto s = generalized_ptdf(ptdf_matrix(net, 0), net);
    const auto split = sign_bipartition(s, 1, all_buses(net), net);
    CHECK(split.zone_plus == std::vector<int>{0, 1});
    CHECK(split.zone_minus == std::vector<int>{2, 3});

    // Restricting the scope leaves the other buses out.
    const std::vector<int> scope{1, 2, 3};
    const auto inner = sign_bipartition(s, 2, scope, net);
    CHECK(inner.zone_plus == std::vector<int>{1, 2});
    CHECK(inner.zone_minus == std::vector<int>{3});

    const std::vector<int> without_end{0, 1};
    CHECK_THROWS_AS(sign_bipartition(s, 2, without_end, net), std::invalid_argument);
}

TEST_CASE("reference column is zero") {
    std::mt19937_64 rng(11);
    for (int t = 0; t < 20; ++t) {
        const Network net = fixtures::random_connected(rng, 3 + t % 8);
        for (int ref = 0; ref < static_cast<int>(net.num_buses()); ++ref)
            CHECK(ptdf_matrix(net, ref).values.col(ref).cwiseAbs().maxCoeff() == 0.0);
    }
}

TEST_CASE("property: reference invariance, antisymmetry and the angle oracle") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 100; ++trial) {
        const int n = 4 + trial % 17;
        const Network net = fixtures::random_connected(rng, n);
        const Eigen::VectorXd p = fixtures::random_balanced(rng, n);
        const double scale = p.lpNorm<Eigen::Infinity>();
        CAPTURE(trial);

        std::vector<PtdfMatrix> hs;
        for (int ref = 0; ref < n; ++ref) hs.push_back(ptdf_matrix(net, ref));
        const auto s = generalized_ptdf(hs[0], net);
        const Eigen::VectorXd oracle = fixtures::btheta_flows(net, p, n - 1);
        const Eigen::VectorXd sp = flows_from_injections(s, p);
        CHECK((sp - oracle).lpNorm<Eigen::Infinity>() <= 1e-9 * scale);

        for (int ref = 0; ref < n; ++ref) {
            const Eigen::VectorXd hp = flows_from_injections(hs[static_cast<std::size_t>(ref)], p);
            CHECK((hp - sp).lpNorm<Eigen::Infinity>() <= 1e-9 * scale);
            // Adding a constant to every row leaves balanced flows alone.
            PtdfMatrix shifted = hs[static_cast<std::size_t>(ref)];
            shifted.values.array() += 3.7;
            CHECK((flows_from_injections(shifted, p) - hp).lpNorm<Eigen::Infinity>() <= 1e-9 * scale);
            const auto other = generalized_ptdf(hs[static_cast<std::size_t>(ref)], net);
            CHECK((other.values - s.values).cwiseAbs().maxCoeff() <= 1e-9);
        }
        for (const auto& br : net.branches)
            CHECK(std::abs(s.values(br.id, br.from_bus) + s.values(br.id, br.to_bus)) <= 1e-9);
    }
}

TEST_CASE("property: sign bipartitions are contiguous and separate the endpoints") {
    std::mt19937_64 rng(3);
    int splits = 0;
    for (int trial = 0; trial < 60; ++trial) {
        const Network net = fixtures::random_connected(rng, 4 + trial % 12);
        const auto s = generalized_ptdf(ptdf_matrix(net, 0), net);
        const auto scope = all_buses(net);
        for (const auto& br : net.branches) {
            if (br.from_bus == br.to_bus) continue;
            try {
                const auto split = sign_bipartition(s, br.id, scope, net);
                ++splits;
                CHECK(std::find(split.zone_plus.begin(), split.zone_plus.end(), br.from_bus) != split.zone_plus.end());
                CHECK(std::find(split.zone_minus.begin(), split.zone_minus.end(), br.to_bus) != split.zone_minus.end());
                CHECK(split.zone_plus.size() + split.zone_minus.size() == scope.size());
                std::vector<int> both = split.zone_plus;
                both.insert(both.end(), split.zone_minus.begin(), split.zone_minus.end());
                std::sort(both.begin(), both.end());
                CHECK(both == scope);
                CHECK(induces_connected_subgraph(net, split.zone_plus));
                CHECK(induces_connected_subgraph(net, split.zone_minus));
            } catch (const DegenerateSplitError&) {
                // Allowed outcome; the caller skips the line.
            }
        }
    }
    CHECK(splits > 200);
}

TEST_CASE("PTDF CSV has a header of bus labels") {
    const Network net = fixtures::make_network(2, {{0, 1}});
    const auto csv = ptdf_to_csv(ptdf_matrix(net, 1).values, net);
    CHECK(csv.substr(0, csv.find('\n')) == "branch,0,1");
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);
}
