#include "modest/interval.hpp"

namespace modest {

SignSplit sign_split(const Mat& m) {
    SignSplit s;
    s.plus = m.cwiseMax(0.0);
    s.minus = s.plus - m;
    s.abs = s.plus + s.minus;
    return s;
}

BinVec rowsupp(const Mat& m, double tol) {
    BinVec r = BinVec::Zero(m.rows());
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        r(i) = (m.row(i).cwiseAbs().maxCoeff() > tol) ? 1 : 0;
    return r;
}

IntervalMatrix mul_const_interval(const Mat& a, const IntervalMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("mul_const_interval: inner dimensions");
    const SignSplit s = sign_split(a);
    return {s.plus * b.lo - s.minus * b.hi, s.plus * b.hi - s.minus * b.lo};
}

IntervalMatrix mul_interval_interval(const IntervalMatrix& a, const IntervalMatrix& b) {
    if (a.cols() != b.rows()) throw DimensionError("mul_interval_interval: inner dimensions");
    const SignSplit al = sign_split(a.lo), au = sign_split(a.hi);
    const SignSplit bl = sign_split(b.lo), bu = sign_split(b.hi);
    Mat lower = al.plus * bl.plus - au.plus * bl.minus - al.minus * bu.plus + au.minus * bu.minus;
    Mat upper = au.plus * bu.plus - al.plus * bu.minus - au.minus * bl.plus + al.minus * bl.minus;
    return {std::move(lower), std::move(upper)};
}

IntervalVector intersect(const IntervalVector& a, const IntervalVector& b) {
    if (a.size() != b.size()) throw DimensionError("intersect: size mismatch");
    IntervalVector out;
    out.lo = a.lo.cwiseMax(b.lo);
    out.hi = a.hi.cwiseMin(b.hi);
    return out;
}

Mat pinv(const Mat& m, double tol) {
    if (m.size() == 0) return Mat(m.cols(), m.rows());
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vec& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    const double cutoff = tol * std::max(smax, 1.0);
    Vec inv = Vec::Zero(sv.size());
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv(i) > cutoff) inv(i) = 1.0 / sv(i);
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

Mat block_form(const Mat& j) {
    const SignSplit s = sign_split(j);
    Mat out(2 * j.rows(), 2 * j.cols());
    out.topLeftCorner(j.rows(), j.cols()) = s.plus;
    out.topRightCorner(j.rows(), j.cols()) = -s.minus;
    out.bottomLeftCorner(j.rows(), j.cols()) = -s.minus;
    out.bottomRightCorner(j.rows(), j.cols()) = s.plus;
    return out;
}

}  // namespace modest
