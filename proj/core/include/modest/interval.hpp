#pragma once

#include <Eigen/Dense>

#include "modest/errors.hpp"

namespace modest {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;
using BinVec = Eigen::VectorXi;  // entries 0/1

// Elementwise lower/upper bound pair.  An IntervalVector may represent the
// empty set (lo > hi in some coordinate) after an intersection; callers that
// require non-emptiness check empty() or go through checked().
struct IntervalVector {
    Vec lo, hi;

    IntervalVector() = default;
    IntervalVector(Vec lo_, Vec hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
        if (lo.size() != hi.size()) throw DimensionError("IntervalVector: lo/hi size mismatch");
    }

    static IntervalVector point(const Vec& x) { return {x, x}; }

    Eigen::Index size() const { return lo.size(); }
    Vec width() const { return hi - lo; }
    Vec mid() const { return 0.5 * (lo + hi); }

    bool empty(double tol = 0.0) const { return ((hi - lo).array() < -tol).any(); }

    bool contains(const Vec& x, double tol = 0.0) const {
        return (x.array() >= lo.array() - tol).all() && (x.array() <= hi.array() + tol).all();
    }
    bool contains(const IntervalVector& other, double tol = 0.0) const {
        return (other.lo.array() >= lo.array() - tol).all() &&
               (other.hi.array() <= hi.array() + tol).all();
    }

    IntervalVector segment(Eigen::Index start, Eigen::Index len) const {
        return {lo.segment(start, len), hi.segment(start, len)};
    }

    // Throws if the invariant lo <= hi is violated.
    const IntervalVector& checked() const {
        if (empty()) throw std::invalid_argument("IntervalVector: lo > hi");
        return *this;
    }
};

inline IntervalVector concat(const IntervalVector& a, const IntervalVector& b) {
    IntervalVector out;
    out.lo.resize(a.size() + b.size());
    out.hi.resize(a.size() + b.size());
    out.lo << a.lo, b.lo;
    out.hi << a.hi, b.hi;
    return out;
}

struct IntervalMatrix {
    Mat lo, hi;

    IntervalMatrix() = default;
    IntervalMatrix(Mat lo_, Mat hi_) : lo(std::move(lo_)), hi(std::move(hi_)) {
        if (lo.rows() != hi.rows() || lo.cols() != hi.cols())
            throw DimensionError("IntervalMatrix: lo/hi shape mismatch");
    }

    static IntervalMatrix point(const Mat& m) { return {m, m}; }

    Eigen::Index rows() const { return lo.rows(); }
    Eigen::Index cols() const { return lo.cols(); }
};

struct SignSplit {
    Mat plus;   // max(M, 0)
    Mat minus;  // plus - M
    Mat abs;    // plus + minus
};

// M = plus - minus, |M| = plus + minus, all parts nonnegative.
SignSplit sign_split(const Mat& m);

// Binary vector, entry i = 0 iff every |M(i,j)| <= tol.
BinVec rowsupp(const Mat& m, double tol = 1e-9);

// Bounds on A*B for constant A and interval B (A+/A- split).
IntervalMatrix mul_const_interval(const Mat& a, const IntervalMatrix& b);

// Bounds on A*B for interval A and interval B.
IntervalMatrix mul_interval_interval(const IntervalMatrix& a, const IntervalMatrix& b);

// [max(lo), min(hi)] elementwise; result may be empty (carried, not thrown).
IntervalVector intersect(const IntervalVector& a, const IntervalVector& b);

// Moore-Penrose pseudoinverse via SVD with singular values <= tol * smax dropped.
Mat pinv(const Mat& m, double tol = 1e-12);

// [[J+, -J-], [-J-, J+]]
Mat block_form(const Mat& j);

}  // namespace modest
