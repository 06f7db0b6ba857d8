#pragma once

#include <string>

#include <Eigen/Dense>

namespace gridzones::lp {

/// min c'x  s.t.  A x = b,  lower <= x <= upper.
/// Bounds may be +/-infinity; a variable with both bounds infinite is free.
struct Problem {
    Eigen::MatrixXd A;
    Eigen::VectorXd b;
    Eigen::VectorXd c;
    Eigen::VectorXd lower;
    Eigen::VectorXd upper;
};

enum class Status { optimal, infeasible, unbounded, iteration_limit };

std::string to_string(Status status);

struct Options {
    double feasibility_tol = 1e-9;
    double optimality_tol = 1e-9;
    double pivot_tol = 1e-10;
    int max_iterations = 100000;
};

struct Solution {
    Status status = Status::infeasible;
    Eigen::VectorXd x;
    /// Row duals y with c_B = B' y; y_i is the sensitivity of the optimum to b_i.
    Eigen::VectorXd duals;
    /// c - A' y for every column.
    Eigen::VectorXd reduced_costs;
    double objective = 0.0;
    int iterations = 0;
};

/// Two-phase bounded-variable primal simplex on a dense tableau. Dantzig
/// pricing, switching to Bland's rule after a run of degenerate pivots. The
/// final basis is refactorised to recover accurate primal values and duals.
Solution solve(const Problem& problem, const Options& options = {});

}  // namespace gridzones::lp
