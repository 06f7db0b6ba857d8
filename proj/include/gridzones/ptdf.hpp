#pragma once

#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "gridzones/grid.hpp"

namespace gridzones {

/// Flow sensitivities of every branch to a unit injection at each bus,
/// withdrawn at reference_bus. The reference column is zero.
struct PtdfMatrix {
    Eigen::MatrixXd values;  // M x N
    int reference_bus = 0;
};

/// Row-shifted PTDF whose two end factors of every line are equal and opposite.
/// Independent of the reference bus the source matrix was built with.
struct GeneralizedPtdf {
    Eigen::MatrixXd values;  // M x N
};

PtdfMatrix ptdf_matrix(const Network& network, int reference_bus);

/// S = H - 1/2 diagv(H |A|') u'
GeneralizedPtdf generalized_ptdf(const PtdfMatrix& h, const Network& network);

/// Branch flows (MW) for nodal injections p. Throws std::invalid_argument on
/// a size mismatch.
Eigen::VectorXd flows_from_injections(const PtdfMatrix& h, const Eigen::VectorXd& p);
Eigen::VectorXd flows_from_injections(const GeneralizedPtdf& s, const Eigen::VectorXd& p);

struct Bipartition {
    std::vector<int> zone_plus;   // contains the line's from_bus
    std::vector<int> zone_minus;  // contains the line's to_bus
};

/// Splits `scope` by the sign of row `line` of S. Coefficients within tol_sign
/// of zero go to zone_plus. Stranded components are then moved to the other
/// zone until both sides are connected. Throws DegenerateSplitError when the
/// endpoints cannot be separated.
Bipartition sign_bipartition(const GeneralizedPtdf& s, int line, std::span<const int> scope,
                             const Network& network, double tol_sign = 1e-9);

/// CSV with a header of bus labels; one row per branch.
std::string ptdf_to_csv(const Eigen::MatrixXd& values, const Network& network);

}  // namespace gridzones
