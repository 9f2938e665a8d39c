#include "modest/lp.hpp"

#include <algorithm>
#include <limits>

namespace modest {
namespace {

constexpr double kCostTol = 1e-9;
constexpr double kPivotTol = 1e-9;
constexpr double kFeasTol = 1e-9;

// Standard-form LP  min f.y  s.t.  A y = b, y >= 0  solved with a revised
// simplex (explicit basis inverse, refactorized periodically).  Columns
// m..m+rows-1 are the phase-1 artificials.
class StandardSimplex {
  public:
    StandardSimplex(const Mat& a, const Vec& b, const Vec& f)
        : a_(a), b_(b), f_(f), rows_(a.rows()), cols_(a.cols()) {}

    enum class Result { Optimal, Infeasible, Unbounded, Stalled };

    Result run() {
        basis_.resize(rows_);
        binv_ = Mat::Identity(rows_, rows_);
        ybasic_ = b_;
        art_sign_.resize(rows_);
        for (Eigen::Index i = 0; i < rows_; ++i) {
            art_sign_[i] = (b_(i) >= 0.0) ? 1.0 : -1.0;
            ybasic_(i) = std::abs(b_(i));
            binv_(i, i) = art_sign_[i];
            basis_[i] = cols_ + i;
        }

        phase1_ = true;
        const Result r1 = iterate();
        if (r1 == Result::Stalled) return r1;
        if (phase1_objective() > 1e-7) return Result::Infeasible;

        phase1_ = false;
        return iterate();
    }

    double objective() const {
        double obj = 0.0;
        for (Eigen::Index i = 0; i < rows_; ++i)
            if (basis_[i] < cols_) obj += f_(basis_[i]) * ybasic_(i);
        return obj;
    }

    // Simplex multipliers of the equality rows; for the dual formulation used
    // by lp_solve these are the primal variables.
    Vec multipliers() const {
        Vec fb = Vec::Zero(rows_);
        for (Eigen::Index i = 0; i < rows_; ++i)
            if (basis_[i] < cols_) fb(i) = f_(basis_[i]);
        return binv_.transpose() * fb;
    }

  private:
    double phase1_objective() const {
        double obj = 0.0;
        for (Eigen::Index i = 0; i < rows_; ++i)
            if (basis_[i] >= cols_) obj += ybasic_(i);
        return obj;
    }

    double cost(Eigen::Index j) const {
        if (phase1_) return j >= cols_ ? 1.0 : 0.0;
        return j >= cols_ ? 0.0 : f_(j);
    }

    Mat column(Eigen::Index j) const {
        if (j < cols_) return a_.col(j);
        Vec e = Vec::Zero(rows_);
        e(j - cols_) = art_sign_[j - cols_];
        return e;
    }

    void refactorize() {
        Mat bmat(rows_, rows_);
        for (Eigen::Index i = 0; i < rows_; ++i) bmat.col(i) = column(basis_[i]);
        binv_ = bmat.fullPivLu().inverse();
        Vec yb = binv_ * b_;
        ybasic_ = yb.cwiseMax(0.0);  // clip refactorization noise
    }

    Result iterate() {
        const long max_iters = 200 * (rows_ + cols_) + 2000;
        long degenerate_streak = 0;
        long since_refactor = 0;

        for (long iter = 0; iter < max_iters; ++iter) {
            const bool bland = degenerate_streak > 2 * (rows_ + 16);

            // pricing
            Vec fb = Vec::Zero(rows_);
            for (Eigen::Index i = 0; i < rows_; ++i) fb(i) = cost(basis_[i]);
            const Vec pi = binv_.transpose() * fb;

            Eigen::Index enter = -1;
            double best = -kCostTol;
            for (Eigen::Index j = 0; j < cols_; ++j) {
                if (is_basic(j)) continue;
                const double rj = cost(j) - pi.dot(a_.col(j));
                if (rj < best) {
                    best = rj;
                    enter = j;
                    if (bland) break;  // first improving index
                }
            }
            if (enter < 0) return Result::Optimal;  // artificials never re-enter

            const Vec u = binv_ * a_.col(enter);

            // prefer kicking a zero-valued artificial out on any nonzero entry
            Eigen::Index leave = -1;
            double theta = 0.0;
            for (Eigen::Index i = 0; i < rows_; ++i) {
                if (basis_[i] >= cols_ && ybasic_(i) <= kFeasTol && std::abs(u(i)) > kPivotTol) {
                    leave = i;
                    theta = 0.0;
                    break;
                }
            }
            if (leave < 0) {
                theta = std::numeric_limits<double>::infinity();
                for (Eigen::Index i = 0; i < rows_; ++i) {
                    if (u(i) > kPivotTol) {
                        const double t = ybasic_(i) / u(i);
                        if (t < theta - 1e-12 ||
                            (t < theta + 1e-12 && (leave < 0 || basis_[i] < basis_[leave]))) {
                            theta = t;
                            leave = i;
                        }
                    }
                }
                if (leave < 0) return phase1_ ? Result::Stalled : Result::Unbounded;
            }

            degenerate_streak = (theta <= 1e-11) ? degenerate_streak + 1 : 0;

            // basis change
            const double upivot = u(leave);
            ybasic_ -= theta * u;
            ybasic_ = ybasic_.cwiseMax(0.0);
            ybasic_(leave) = theta;
            basis_[leave] = enter;

            if (std::abs(upivot) < 1e-8 || ++since_refactor >= 64) {
                refactorize();
                since_refactor = 0;
            } else {
                Vec eta = -u / upivot;
                eta(leave) = 1.0 / upivot;
                const Mat row = binv_.row(leave);
                for (Eigen::Index i = 0; i < rows_; ++i) {
                    if (i == leave) continue;
                    binv_.row(i) += eta(i) * row;
                }
                binv_.row(leave) = eta(leave) * row;
            }
        }
        return Result::Stalled;
    }

    bool is_basic(Eigen::Index j) const {
        return std::find(basis_.begin(), basis_.end(), j) != basis_.end();
    }

    const Mat& a_;
    const Vec& b_;
    const Vec& f_;
    Eigen::Index rows_, cols_;
    bool phase1_ = true;
    std::vector<Eigen::Index> basis_;
    std::vector<double> art_sign_;
    Mat binv_;
    Vec ybasic_;
};

LpSolution solve_impl(const LpProblem& p, bool allow_probe);

// min t  s.t.  A x - t 1 <= b, t >= -1 : t* <= 0 iff Ax <= b is satisfiable.
bool primal_feasible(const LpProblem& p) {
    const Eigen::Index m = p.ineq_A.rows(), n = p.ineq_A.cols();
    LpProblem probe;
    probe.objective = Vec::Zero(n + 1);
    probe.objective(n) = 1.0;
    probe.ineq_A = Mat::Zero(m + 1, n + 1);
    probe.ineq_A.topLeftCorner(m, n) = p.ineq_A;
    probe.ineq_A.col(n).head(m).setConstant(-1.0);
    probe.ineq_A(m, n) = -1.0;
    probe.ineq_b = Vec::Zero(m + 1);
    probe.ineq_b.head(m) = p.ineq_b;
    probe.ineq_b(m) = 1.0;
    const LpSolution s = solve_impl(probe, false);
    return s.status == LpStatus::Optimal && s.objective_value <= 1e-7;
}

LpSolution solve_impl(const LpProblem& p, bool allow_probe) {
    const Eigen::Index m = p.ineq_A.rows(), n = p.ineq_A.cols();
    if (p.objective.size() != n || p.ineq_b.size() != m)
        throw DimensionError("lp_solve: inconsistent problem dimensions");

    LpSolution out;
    if (n == 0) {
        out.status = (p.ineq_b.size() == 0 || p.ineq_b.minCoeff() >= -kFeasTol)
                         ? LpStatus::Optimal
                         : LpStatus::Infeasible;
        out.x = Vec(0);
        return out;
    }
    if (m == 0) {
        out.status = (p.objective.cwiseAbs().maxCoeff() == 0.0) ? LpStatus::Optimal
                                                                : LpStatus::Unbounded;
        out.x = Vec::Zero(n);
        return out;
    }

    // dual:  min b.y  s.t.  A^T y = -c, y >= 0
    const Mat at = p.ineq_A.transpose();
    const Vec rhs = -p.objective;
    StandardSimplex simplex(at, rhs, p.ineq_b);
    const auto r = simplex.run();

    switch (r) {
        case StandardSimplex::Result::Stalled:
            throw NumericalFailure("lp_solve: simplex pivoting stalled");
        case StandardSimplex::Result::Unbounded:
            out.status = LpStatus::Infeasible;  // dual unbounded => primal infeasible
            return out;
        case StandardSimplex::Result::Infeasible:
            // dual infeasible: primal is unbounded or infeasible
            if (allow_probe && !primal_feasible(p)) {
                out.status = LpStatus::Infeasible;
            } else {
                out.status = LpStatus::Unbounded;
            }
            return out;
        case StandardSimplex::Result::Optimal:
            break;
    }

    out.status = LpStatus::Optimal;
    out.x = simplex.multipliers();
    out.objective_value = p.objective.dot(out.x);
    return out;
}

}  // namespace

LpSolution lp_solve(const LpProblem& p) { return solve_impl(p, true); }

}  // namespace modest
