#include "gridzones/lp.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include <Eigen/LU>

namespace gridzones::lp {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class VarState : unsigned char { basic, at_lower, at_upper, free_zero };

class Tableau {
public:
    Tableau(const Problem& p, const Options& opt) : opt_(opt) {
        m_ = static_cast<int>(p.A.rows());
        n_ = static_cast<int>(p.A.cols());
        total_ = n_ + m_;
        lo_.resize(total_);
        up_.resize(total_);
        x_.resize(total_);
        state_.resize(total_);
        lo_.head(n_) = p.lower;
        up_.head(n_) = p.upper;
        lo_.tail(m_).setZero();
        up_.tail(m_).setConstant(kInf);

        for (int j = 0; j < n_; ++j) {
            if (std::isfinite(lo_[j])) {
                x_[j] = lo_[j];
                state_[j] = VarState::at_lower;
            } else if (std::isfinite(up_[j])) {
                x_[j] = up_[j];
                state_[j] = VarState::at_upper;
            } else {
                x_[j] = 0.0;
                state_[j] = VarState::free_zero;
            }
        }
        Eigen::VectorXd r = p.b - p.A * x_.head(n_);
        sign_.resize(m_);
        t_.resize(m_, total_);
        t_.setZero();
        basis_.resize(m_);
        for (int i = 0; i < m_; ++i) {
            sign_[i] = r[i] >= 0.0 ? 1.0 : -1.0;
            t_.row(i).head(n_) = sign_[i] * p.A.row(i);
            t_(i, n_ + i) = 1.0;
            basis_[i] = n_ + i;
            x_[n_ + i] = std::abs(r[i]);
            state_[n_ + i] = VarState::basic;
        }
    }

    // Returns the status of the phase; cost has length total_.
    Status run(const Eigen::VectorXd& cost, int& iterations) {
        d_ = cost;
        for (int i = 0; i < m_; ++i) {
            const double cb = cost[basis_[i]];
            if (cb != 0.0) d_ -= cb * t_.row(i).transpose();
        }
        int degenerate_run = 0;
        bool bland = false;
        while (true) {
            if (iterations >= opt_.max_iterations) return Status::iteration_limit;
            int entering = -1;
            double dir = 0.0;
            double best = 0.0;
            for (int j = 0; j < total_; ++j) {
                if (state_[j] == VarState::basic || lo_[j] == up_[j]) continue;
                const double dj = d_[j];
                double score = 0.0, jdir = 0.0;
                if ((state_[j] == VarState::at_lower || state_[j] == VarState::free_zero) && dj < -opt_.optimality_tol) {
                    score = -dj;
                    jdir = 1.0;
                } else if ((state_[j] == VarState::at_upper || state_[j] == VarState::free_zero) &&
                           dj > opt_.optimality_tol) {
                    score = dj;
                    jdir = -1.0;
                }
                if (jdir == 0.0) continue;
                if (bland) {
                    entering = j;
                    dir = jdir;
                    break;
                }
                if (score > best) {
                    best = score;
                    entering = j;
                    dir = jdir;
                }
            }
            if (entering < 0) return Status::optimal;

            // Ratio test. Basic i moves by -dir * t_(i, entering) per unit step.
            double step = kInf;
            int leave_row = -1;
            double leave_pivot = 0.0;
            if (std::isfinite(lo_[entering]) && std::isfinite(up_[entering])) step = up_[entering] - lo_[entering];
            for (int i = 0; i < m_; ++i) {
                const double alpha = t_(i, entering);
                if (std::abs(alpha) <= opt_.pivot_tol) continue;
                const int bv = basis_[i];
                const double rate = -dir * alpha;
                double limit;
                if (rate < 0.0) {
                    if (!std::isfinite(lo_[bv])) continue;
                    limit = (x_[bv] - lo_[bv]) / -rate;
                } else {
                    if (!std::isfinite(up_[bv])) continue;
                    limit = (up_[bv] - x_[bv]) / rate;
                }
                limit = std::max(limit, 0.0);
                const bool better = limit < step - 1e-12 ||
                                    (leave_row >= 0 && limit <= step + 1e-12 &&
                                     (bland ? bv < basis_[leave_row] : std::abs(alpha) > std::abs(leave_pivot)));
                if (better || (leave_row < 0 && limit < step)) {
                    step = limit;
                    leave_row = i;
                    leave_pivot = alpha;
                }
            }
            if (!std::isfinite(step)) return Status::unbounded;
            ++iterations;

            if (step <= 1e-12) {
                if (++degenerate_run > 50) bland = true;
            } else {
                degenerate_run = 0;
                bland = false;
            }

            for (int i = 0; i < m_; ++i) x_[basis_[i]] -= dir * t_(i, entering) * step;
            x_[entering] += dir * step;

            if (leave_row < 0) {
                // bound flip
                state_[entering] = dir > 0 ? VarState::at_upper : VarState::at_lower;
                x_[entering] = dir > 0 ? up_[entering] : lo_[entering];
                continue;
            }

            const int leaving = basis_[leave_row];
            const double rate = -dir * leave_pivot;
            if (rate < 0.0) {
                x_[leaving] = lo_[leaving];
                state_[leaving] = VarState::at_lower;
            } else {
                x_[leaving] = up_[leaving];
                state_[leaving] = VarState::at_upper;
            }
            pivot(leave_row, entering);
            basis_[leave_row] = entering;
            state_[entering] = VarState::basic;
        }
    }

    double artificial_sum() const { return x_.tail(m_).sum(); }

    void close_artificials() {
        for (int j = n_; j < total_; ++j) {
            up_[j] = 0.0;
            if (state_[j] != VarState::basic) {
                x_[j] = 0.0;
                state_[j] = VarState::at_lower;
            }
        }
    }

    Solution finish(const Problem& p, Status status, int iterations) const {
        Solution s;
        s.status = status;
        s.iterations = iterations;
        s.x = x_.head(n_);
        if (status != Status::optimal) return s;

        // Refactorise the final basis over [A | diag(sign)].
        Eigen::MatrixXd basis(m_, m_);
        Eigen::VectorXd cb(m_);
        for (int i = 0; i < m_; ++i) {
            const int j = basis_[i];
            if (j < n_) {
                basis.col(i) = p.A.col(j);
                cb[i] = p.c[j];
            } else {
                basis.col(i).setZero();
                basis(j - n_, i) = sign_[j - n_];
                cb[i] = 0.0;
            }
        }
        Eigen::VectorXd rhs = p.b;
        for (int j = 0; j < n_; ++j)
            if (state_[j] != VarState::basic && x_[j] != 0.0) rhs -= p.A.col(j) * x_[j];
        if (m_ > 0) {
            Eigen::PartialPivLU<Eigen::MatrixXd> lu(basis);
            Eigen::VectorXd xb = lu.solve(rhs);
            Eigen::VectorXd y = lu.transpose().solve(cb);
            if (xb.allFinite() && y.allFinite()) {
                for (int i = 0; i < m_; ++i)
                    if (basis_[i] < n_) s.x[basis_[i]] = xb[i];
                s.duals = y;
            } else {
                s.duals = Eigen::VectorXd::Zero(m_);
            }
        } else {
            s.duals.resize(0);
        }
        // Snap refactorised values onto bounds they overshoot by rounding.
        for (int j = 0; j < n_; ++j) {
            if (s.x[j] < lo_[j]) s.x[j] = lo_[j];
            if (s.x[j] > up_[j]) s.x[j] = up_[j];
        }
        s.reduced_costs = p.c - p.A.transpose() * s.duals;
        s.objective = p.c.dot(s.x);
        return s;
    }

    int rows() const { return m_; }
    int cols() const { return n_; }
    int total() const { return total_; }

private:
    void pivot(int r, int c) {
        const double piv = t_(r, c);
        t_.row(r) /= piv;
        for (int i = 0; i < m_; ++i) {
            if (i == r) continue;
            const double f = t_(i, c);
            if (f != 0.0) t_.row(i) -= f * t_.row(r);
        }
        const double fd = d_[c];
        if (fd != 0.0) d_ -= fd * t_.row(r).transpose();
        // exact zeros in the pivot column keep the tableau tidy
        for (int i = 0; i < m_; ++i) t_(i, c) = i == r ? 1.0 : 0.0;
        d_[c] = 0.0;
    }

    Options opt_;
    int m_ = 0, n_ = 0, total_ = 0;
    Eigen::MatrixXd t_;
    Eigen::VectorXd d_, lo_, up_, x_, sign_;
    std::vector<int> basis_;
    std::vector<VarState> state_;
};

}  // namespace

std::string to_string(Status status) {
    switch (status) {
        case Status::optimal: return "optimal";
        case Status::infeasible: return "infeasible";
        case Status::unbounded: return "unbounded";
        case Status::iteration_limit: return "iteration limit";
    }
    return "unknown";
}

Solution solve(const Problem& p, const Options& options) {
    const auto m = p.A.rows(), n = p.A.cols();
    if (p.b.size() != m || p.c.size() != n || p.lower.size() != n || p.upper.size() != n)
        throw std::invalid_argument("lp::solve: inconsistent problem dimensions");
    for (Eigen::Index j = 0; j < n; ++j)
        if (p.lower[j] > p.upper[j]) {
            Solution s;
            s.status = Status::infeasible;
            s.x = Eigen::VectorXd::Zero(n);
            return s;
        }

    Tableau tab(p, options);
    int iterations = 0;

    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(tab.total());
    phase1.tail(m).setOnes();
    Status st = tab.run(phase1, iterations);
    if (st != Status::optimal) return tab.finish(p, st == Status::unbounded ? Status::infeasible : st, iterations);
    const double scale = 1.0 + (m > 0 ? p.b.cwiseAbs().maxCoeff() : 0.0);
    if (tab.artificial_sum() > options.feasibility_tol * scale * 10.0)
        return tab.finish(p, Status::infeasible, iterations);

    tab.close_artificials();
    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(tab.total());
    phase2.head(n) = p.c;
    st = tab.run(phase2, iterations);
    return tab.finish(p, st, iterations);
}

}  // namespace gridzones::lp
