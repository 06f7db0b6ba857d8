#include "gridzones/opf.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "gridzones/format.hpp"
#include "gridzones/lp.hpp"

namespace gridzones {
namespace {

double effective_limit(const Network& network, const OpfOptions& options, int branch) {
    if (!options.enforce_limits) return kUnlimited;
    if (auto it = options.limit_overrides.find(branch); it != options.limit_overrides.end()) return it->second;
    return network.branches[static_cast<std::size_t>(branch)].flow_limit;
}

}  // namespace

DispatchSolution dc_opf(const Network& network, const OpfOptions& options) {
    const auto n_bus = static_cast<Eigen::Index>(network.buses.size());
    const auto n_line = static_cast<Eigen::Index>(network.branches.size());
    const auto n_gen = static_cast<Eigen::Index>(network.generators.size());
    if (n_bus == 0) throw std::invalid_argument("dc_opf: empty network");
    if (!options.fixed_injection.empty() && static_cast<Eigen::Index>(options.fixed_injection.size()) != n_bus)
        throw std::invalid_argument("dc_opf: fixed_injection size does not match bus count");

    // Columns: [p (gens)] [theta (buses 1..N-1)] [f (branches)]
    // Rows:    [nodal balance (buses)] [flow definition (branches)]
    const Eigen::Index theta0 = n_gen;
    const Eigen::Index flow0 = n_gen + n_bus - 1;
    const Eigen::Index n_var = flow0 + n_line;
    const Eigen::Index n_row = n_bus + n_line;
    auto theta_col = [&](int bus) { return theta0 + bus - 1; };

    lp::Problem lp;
    lp.A = Eigen::MatrixXd::Zero(n_row, n_var);
    lp.b = Eigen::VectorXd::Zero(n_row);
    lp.c = Eigen::VectorXd::Zero(n_var);
    lp.lower = Eigen::VectorXd::Constant(n_var, -kUnlimited);
    lp.upper = Eigen::VectorXd::Constant(n_var, kUnlimited);

    for (Eigen::Index g = 0; g < n_gen; ++g) {
        const auto& gen = network.generators[static_cast<std::size_t>(g)];
        lp.A(gen.bus, g) = 1.0;
        lp.c[g] = gen.marginal_cost;
        lp.lower[g] = gen.p_min;
        lp.upper[g] = gen.p_max;
    }
    for (Eigen::Index n = 0; n < n_bus; ++n) {
        lp.b[n] = network.buses[static_cast<std::size_t>(n)].demand;
        if (!options.fixed_injection.empty()) lp.b[n] -= options.fixed_injection[static_cast<std::size_t>(n)];
    }
    for (Eigen::Index l = 0; l < n_line; ++l) {
        const auto& br = network.branches[static_cast<std::size_t>(l)];
        const Eigen::Index f = flow0 + l;
        const Eigen::Index row = n_bus + l;
        lp.A(br.from_bus, f) -= 1.0;
        lp.A(br.to_bus, f) += 1.0;

        const double susceptance = network.base_mva / br.reactance;
        lp.A(row, f) = 1.0;
        if (br.from_bus != 0) lp.A(row, theta_col(br.from_bus)) -= susceptance;
        if (br.to_bus != 0) lp.A(row, theta_col(br.to_bus)) += susceptance;

        const double limit = effective_limit(network, options, static_cast<int>(l));
        if (std::isfinite(limit)) {
            lp.lower[f] = -limit;
            lp.upper[f] = limit;
        }
    }

    const auto result = lp::solve(lp);

    DispatchSolution sol;
    if (result.status != lp::Status::optimal) {
        sol.feasible = false;
        sol.diagnostic = result.status == lp::Status::infeasible
                             ? fmt::format("no dispatch meets demand {:.6g} MW within generator and flow limits",
                                           network.total_demand())
                             : "linear program " + lp::to_string(result.status);
        if (result.status == lp::Status::unbounded) throw std::logic_error("dc_opf: unbounded LP with finite p_max");
        return sol;
    }

    sol.feasible = true;
    sol.generation.assign(result.x.data(), result.x.data() + n_gen);
    sol.angles.assign(static_cast<std::size_t>(n_bus), 0.0);
    for (Eigen::Index n = 1; n < n_bus; ++n) sol.angles[static_cast<std::size_t>(n)] = result.x[theta_col(static_cast<int>(n))];
    sol.flows.assign(result.x.data() + flow0, result.x.data() + flow0 + n_line);
    sol.nodal_prices.assign(result.duals.data(), result.duals.data() + n_bus);
    sol.objective = 0.0;
    for (Eigen::Index g = 0; g < n_gen; ++g)
        sol.objective += network.generators[static_cast<std::size_t>(g)].marginal_cost * sol.generation[static_cast<std::size_t>(g)];

    for (Eigen::Index l = 0; l < n_line; ++l) {
        const double limit = effective_limit(network, options, static_cast<int>(l));
        if (!std::isfinite(limit)) continue;
        if (std::abs(sol.flows[static_cast<std::size_t>(l)]) >= limit - options.tol.binding * std::max(1.0, limit))
            sol.binding_lines.push_back(static_cast<int>(l));
    }
    return sol;
}

DispatchSolution dc_opf(const Network& network, bool enforce_limits) {
    OpfOptions options;
    options.enforce_limits = enforce_limits;
    return dc_opf(network, options);
}

double uniform_price(const DispatchSolution& solution, const Network& network, const OpfTolerances& tol) {
    if (!solution.feasible) throw std::invalid_argument("uniform_price: infeasible dispatch");
    bool any = false;
    double price = 0.0;
    for (std::size_t g = 0; g < network.generators.size(); ++g) {
        if (solution.generation.at(g) <= tol.running) continue;
        price = any ? std::max(price, network.generators[g].marginal_cost) : network.generators[g].marginal_cost;
        any = true;
    }
    if (!any) throw std::invalid_argument("uniform_price: no generator is running");
    return price;
}

std::vector<int> congested_lines(const DispatchSolution& solution) { return solution.binding_lines; }

std::string dispatch_to_json(const DispatchSolution& solution) {
    using nlohmann::json;
    auto arr = [](const std::vector<double>& v) {
        json a = json::array();
        for (double x : v) a.push_back(round12(x));
        return a;
    };
    json doc;
    doc["feasible"] = solution.feasible;
    if (!solution.diagnostic.empty()) doc["diagnostic"] = solution.diagnostic;
    doc["generation"] = arr(solution.generation);
    doc["angles"] = arr(solution.angles);
    doc["flows"] = arr(solution.flows);
    doc["nodal_prices"] = arr(solution.nodal_prices);
    doc["binding_lines"] = solution.binding_lines;
    doc["objective"] = round12(solution.objective);
    return doc.dump(2) + "\n";
}

}  // namespace gridzones
