#pragma once

#include "modest/interval.hpp"

namespace modest {

// min objective . x  subject to  ineq_A x <= ineq_b, x free.
struct LpProblem {
    Vec objective;
    Mat ineq_A;
    Vec ineq_b;
};

enum class LpStatus { Optimal, Infeasible, Unbounded };

struct LpSolution {
    LpStatus status = LpStatus::Infeasible;
    Vec x;
    double objective_value = 0.0;
};

// Dense revised simplex. Throws NumericalFailure if pivoting stalls.
LpSolution lp_solve(const LpProblem& p);

}  // namespace modest
