#include "gridzones/ptdf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include <fmt/format.h>

#include "gridzones/errors.hpp"
#include "gridzones/format.hpp"

namespace gridzones {

PtdfMatrix ptdf_matrix(const Network& network, int reference_bus) {
    const auto n = static_cast<Eigen::Index>(network.buses.size());
    const auto m = static_cast<Eigen::Index>(network.branches.size());
    if (reference_bus < 0 || reference_bus >= n)
        throw std::invalid_argument(fmt::format("ptdf_matrix: reference bus {} out of range", reference_bus));

    // Branch susceptance times incidence (M x N) and the bus susceptance matrix.
    const Eigen::MatrixXd a = incidence_matrix(network);
    Eigen::VectorXd b(m);
    for (Eigen::Index l = 0; l < m; ++l) b[l] = 1.0 / network.branches[static_cast<std::size_t>(l)].reactance;
    const Eigen::MatrixXd bf = b.asDiagonal() * a;
    const Eigen::MatrixXd bbus = a.transpose() * bf;

    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < n; ++k)
        if (k != reference_bus) keep.push_back(k);
    const auto r = static_cast<Eigen::Index>(keep.size());

    PtdfMatrix h;
    h.reference_bus = reference_bus;
    h.values = Eigen::MatrixXd::Zero(m, n);
    if (r == 0 || m == 0) return h;

    Eigen::MatrixXd reduced(r, r), bf_reduced(m, r);
    for (Eigen::Index i = 0; i < r; ++i) {
        bf_reduced.col(i) = bf.col(keep[i]);
        for (Eigen::Index j = 0; j < r; ++j) reduced(i, j) = bbus(keep[i], keep[j]);
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(reduced);
    const double scale = reduced.diagonal().cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        ldlt.vectorD().minCoeff() <= 1e-12 * std::max(scale, 1.0))
        throw std::logic_error("ptdf_matrix: reduced susceptance matrix is singular (disconnected network)");

    // H_reduced = Bf_reduced * B_reduced^-1, computed as (B_reduced^-1 Bf_reduced')'
    const Eigen::MatrixXd ht = ldlt.solve(bf_reduced.transpose());
    for (Eigen::Index i = 0; i < r; ++i) h.values.col(keep[i]) = ht.row(i).transpose();
    return h;
}

GeneralizedPtdf generalized_ptdf(const PtdfMatrix& h, const Network& network) {
    const Eigen::MatrixXd abs_a = incidence_matrix(network).cwiseAbs();
    if (abs_a.rows() != h.values.rows() || abs_a.cols() != h.values.cols())
        throw std::invalid_argument("generalized_ptdf: matrix does not match network dimensions");
    // diagv(H |A|') without forming the M x M product: row l sums H_ln + H_lm.
    const Eigen::VectorXd end_sum = (h.values.array() * abs_a.array()).rowwise().sum();
    const Eigen::RowVectorXd ones = Eigen::RowVectorXd::Ones(h.values.cols());
    return GeneralizedPtdf{h.values - 0.5 * end_sum * ones};
}

namespace {

Eigen::VectorXd multiply(const Eigen::MatrixXd& op, const Eigen::VectorXd& p) {
    if (op.cols() != p.size())
        throw std::invalid_argument(
            fmt::format("flows_from_injections: {} injections for {} buses", p.size(), op.cols()));
    return op * p;
}

}  // namespace

Eigen::VectorXd flows_from_injections(const PtdfMatrix& h, const Eigen::VectorXd& p) { return multiply(h.values, p); }

Eigen::VectorXd flows_from_injections(const GeneralizedPtdf& s, const Eigen::VectorXd& p) {
    return multiply(s.values, p);
}

Bipartition sign_bipartition(const GeneralizedPtdf& s, int line, std::span<const int> scope, const Network& network,
                             double tol_sign) {
    if (line < 0 || line >= static_cast<int>(network.branches.size()))
        throw std::invalid_argument(fmt::format("sign_bipartition: unknown line {}", line));
    const auto& br = network.branches[static_cast<std::size_t>(line)];
    const int n_end = br.from_bus, m_end = br.to_bus;

    const auto n = network.buses.size();
    std::vector<char> in_scope(n, 0);
    for (int b : scope) in_scope.at(static_cast<std::size_t>(b)) = 1;
    if (!in_scope[n_end] || !in_scope[m_end])
        throw std::invalid_argument(fmt::format("sign_bipartition: line {} is not inside the scope", line));
    if (!induces_connected_subgraph(network, scope))
        throw std::invalid_argument("sign_bipartition: scope is not connected");

    // side: +1 plus, -1 minus, 0 outside scope
    std::vector<int> side(n, 0);
    for (std::size_t k = 0; k < n; ++k)
        if (in_scope[k]) side[k] = s.values(line, static_cast<Eigen::Index>(k)) < -tol_sign ? -1 : 1;
    if (side[n_end] != 1 || side[m_end] != -1)
        throw DegenerateSplitError(
            fmt::format("degenerate split: line {} end factors ({:.3g}, {:.3g}) do not separate its endpoints", line,
                        s.values(line, n_end), s.values(line, m_end)));

    auto members = [&](int which) {
        std::vector<int> out;
        for (std::size_t k = 0; k < n; ++k)
            if (side[k] == which) out.push_back(static_cast<int>(k));
        return out;
    };

    // Move stranded components across until both sides are connected.
    for (bool changed = true; changed;) {
        changed = false;
        for (int which : {1, -1}) {
            const int anchor = which == 1 ? n_end : m_end;
            for (const auto& comp : connected_components(network, members(which))) {
                if (std::binary_search(comp.begin(), comp.end(), anchor)) continue;
                for (int b : comp) side[b] = -which;
                changed = true;
            }
        }
    }

    Bipartition out{members(1), members(-1)};
    if (out.zone_plus.empty() || out.zone_minus.empty())
        throw DegenerateSplitError(fmt::format("degenerate split on line {}: a zone would be empty", line));
    return out;
}

std::string ptdf_to_csv(const Eigen::MatrixXd& values, const Network& network) {
    std::ostringstream out;
    out << "branch";
    for (const auto& bus : network.buses) out << ',' << bus.label;
    out << '\n';
    for (Eigen::Index l = 0; l < values.rows(); ++l) {
        out << l;
        for (Eigen::Index k = 0; k < values.cols(); ++k) out << ',' << format_number(values(l, k));
        out << '\n';
    }
    return out.str();
}

}  // namespace gridzones
