#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "modest/interval.hpp"
#include "modest/lp.hpp"

namespace modest {

using VectorFn = std::function<Vec(const Vec&)>;

// Affine sandwich of a (pair of) vector fields over a box:
//   A x + e_lo <= psi_lo(x) <= psi_hi(x) <= A x + e_hi   for all x in domain.
struct AffineAbstraction {
    Mat A;
    Vec e_hi, e_lo;
    IntervalVector domain;
    double theta = 0.0;  // achieved width objective

    Eigen::Index out_dim() const { return A.rows(); }
    Eigen::Index in_dim() const { return A.cols(); }

    // Interval image of a sub-box of the domain through the sandwich.
    IntervalVector image(const IntervalVector& box) const;
};

// sigma_j = lipschitz_j * dispersion: enforcing the sandwich at samples with
// this margin makes it valid on the whole box for L-Lipschitz fields.
Vec sigma_margin(const Vec& lipschitz, double dispersion);

// All 2^k corners of the box (zero-width axes are not branched on).
// Throws UnsupportedDimension when more than 2^12 corners would be needed.
std::vector<Vec> box_vertices(const IntervalVector& box);

// Uniform grid including endpoints, per_axis points per non-degenerate axis.
std::vector<Vec> grid_samples(const IntervalVector& box, int per_axis);

// Dispersion (max distance from a domain point to its nearest sample) of the
// uniform grid produced by grid_samples.
double grid_dispersion(const IntervalVector& box, int per_axis);

// Vertices plus a grid whose per-axis count keeps dispersion <= width/16,
// subject to a total sample budget.
std::vector<Vec> default_samples(const IntervalVector& box, std::size_t budget = 4096);

// Solves the parallel affine abstraction LP over the given samples.
// If global_abs is provided, the local abstraction is constrained to stay
// inside the global one at every box vertex.
// Throws AbstractionInfeasible when the constraints admit no sandwich.
AffineAbstraction solve_parallel_abstraction(const VectorFn& psi_lo, const VectorFn& psi_hi,
                                             const IntervalVector& domain,
                                             const std::vector<Vec>& samples, const Vec& sigma,
                                             const AffineAbstraction* global_abs = nullptr);

struct ValidationReport {
    bool ok = false;
    double worst_violation = 0.0;
};

ValidationReport validate(const AffineAbstraction& abs, const VectorFn& psi_lo,
                          const VectorFn& psi_hi, const std::vector<Vec>& test_points,
                          double tol = 1e-9);

}  // namespace modest
