#pragma once

#include "modest/abstraction.hpp"
#include "modest/interval.hpp"

namespace modest {

// Entrywise bounds on the Jacobian of a vector field over its domain.
struct JacobianBounds {
    Mat lo, hi;

    Eigen::Index rows() const { return lo.rows(); }
    Eigen::Index cols() const { return lo.cols(); }
};

// Decomposition function ingredients: f_d(x, y) = f(z) + C (x - y), where
// z_j is taken from x or y per row according to anchor_takes_x.
struct DecompositionSpec {
    Mat C;  // nonnegative slope correction
    Eigen::Matrix<bool, Eigen::Dynamic, Eigen::Dynamic> anchor_takes_x;
};

// Bounded-Jacobian construction: increasing entries anchor to x, decreasing
// entries anchor to y, sign-indefinite entries anchor to x and pay a slope
// correction -lo.
DecompositionSpec build_decomposition(const JacobianBounds& jb);

Vec eval_decomposition(const VectorFn& f, const DecompositionSpec& spec, const Vec& x,
                       const Vec& y);

// [f_d(lo, hi), f_d(hi, lo)]: encloses f over the box.
IntervalVector embed_bound(const VectorFn& f, const DecompositionSpec& spec,
                           const IntervalVector& box);

// Elementwise tightest of the decomposition bound and the affine
// abstraction bound; still encloses f over the box.
IntervalVector tight_bound(const VectorFn& f, const DecompositionSpec& spec,
                           const AffineAbstraction& abs, const IntervalVector& box);

// Entrywise min/max of sampled Jacobians, optionally padded.
JacobianBounds jacobian_bounds_from_samples(const std::function<Mat(const Vec&)>& jacobian,
                                            const std::vector<Vec>& samples, double pad = 0.0);

}  // namespace modest
