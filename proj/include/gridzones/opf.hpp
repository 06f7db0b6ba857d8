#pragma once

#include <map>
#include <string>
#include <vector>

#include "gridzones/grid.hpp"

namespace gridzones {

struct OpfTolerances {
    double binding = 1e-6;  // MW, scaled by max(1, limit)
    double dual = 1e-6;
    double running = 1e-6;  // MW
};

struct OpfOptions {
    bool enforce_limits = true;
    /// Per-branch limit replacing flow_limit when enforce_limits is set.
    /// kUnlimited lifts the constraint for that branch.
    std::map<int, double> limit_overrides;
    /// Fixed net injection per bus (MW, positive into the bus). Used for the
    /// border flows of a zone sub-network. Empty means none.
    std::vector<double> fixed_injection;
    OpfTolerances tol;
};

struct DispatchSolution {
    bool feasible = false;
    std::string diagnostic;
    std::vector<double> generation;     // MW per generator
    std::vector<double> angles;         // rad per bus, bus 0 fixed at 0
    std::vector<double> flows;          // MW per branch, from -> to positive
    std::vector<double> nodal_prices;   // duals of the nodal balance rows
    std::vector<int> binding_lines;     // ascending branch ids
    double objective = 0.0;             // currency/h
};

/// Lossless DC optimal power flow in the B-theta form: nodal balance
/// C_g p - A' f = d - injection, flow definition f = b (theta_from - theta_to),
/// generator bounds and, when enforce_limits is set, |f| <= limit.
/// An infeasible LP yields feasible == false with a diagnostic; it never
/// sheds load.
DispatchSolution dc_opf(const Network& network, const OpfOptions& options = {});

/// Convenience overload matching the common call shape.
DispatchSolution dc_opf(const Network& network, bool enforce_limits);

/// Highest marginal cost among generators producing more than tol.running.
/// Throws std::invalid_argument for an infeasible solution or when nothing runs.
double uniform_price(const DispatchSolution& solution, const Network& network,
                     const OpfTolerances& tol = {});

std::vector<int> congested_lines(const DispatchSolution& solution);

std::string dispatch_to_json(const DispatchSolution& solution);

}  // namespace gridzones
