#include "modest/mixed_monotone.hpp"

#include <map>
#include <vector>

namespace modest {

DecompositionSpec build_decomposition(const JacobianBounds& jb) {
    const Eigen::Index m = jb.rows(), n = jb.cols();
    DecompositionSpec spec;
    spec.C = Mat::Zero(m, n);
    spec.anchor_takes_x.resize(m, n);
    for (Eigen::Index i = 0; i < m; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            if (jb.lo(i, j) >= 0.0) {
                spec.anchor_takes_x(i, j) = true;
            } else if (jb.hi(i, j) <= 0.0) {
                spec.anchor_takes_x(i, j) = false;
            } else {
                spec.anchor_takes_x(i, j) = true;
                spec.C(i, j) = -jb.lo(i, j);
            }
        }
    }
    return spec;
}

Vec eval_decomposition(const VectorFn& f, const DecompositionSpec& spec, const Vec& x,
                       const Vec& y) {
    const Eigen::Index m = spec.C.rows(), n = spec.C.cols();
    if (x.size() != n || y.size() != n) throw DimensionError("eval_decomposition: arg size");

    // rows sharing an anchor pattern share one evaluation of f
    Vec out(m);
    std::map<std::vector<bool>, Vec> cache;
    for (Eigen::Index i = 0; i < m; ++i) {
        std::vector<bool> pattern(n);
        for (Eigen::Index j = 0; j < n; ++j) pattern[j] = spec.anchor_takes_x(i, j);
        auto it = cache.find(pattern);
        if (it == cache.end()) {
            Vec z(n);
            for (Eigen::Index j = 0; j < n; ++j) z(j) = pattern[j] ? x(j) : y(j);
            it = cache.emplace(std::move(pattern), f(z)).first;
        }
        out(i) = it->second(i) + spec.C.row(i).dot(x - y);
    }
    return out;
}

IntervalVector embed_bound(const VectorFn& f, const DecompositionSpec& spec,
                           const IntervalVector& box) {
    IntervalVector out;
    out.lo = eval_decomposition(f, spec, box.lo, box.hi);
    out.hi = eval_decomposition(f, spec, box.hi, box.lo);
    return out;
}

IntervalVector tight_bound(const VectorFn& f, const DecompositionSpec& spec,
                           const AffineAbstraction& abs, const IntervalVector& box) {
    const IntervalVector emb = embed_bound(f, spec, box);
    const IntervalVector aff = abs.image(box);
    IntervalVector out;
    out.hi = emb.hi.cwiseMin(aff.hi);
    out.lo = emb.lo.cwiseMax(aff.lo);
    return out;
}

JacobianBounds jacobian_bounds_from_samples(const std::function<Mat(const Vec&)>& jacobian,
                                            const std::vector<Vec>& samples, double pad) {
    if (samples.empty()) throw std::invalid_argument("jacobian_bounds_from_samples: no samples");
    JacobianBounds jb;
    jb.lo = jacobian(samples.front());
    jb.hi = jb.lo;
    for (std::size_t s = 1; s < samples.size(); ++s) {
        const Mat j = jacobian(samples[s]);
        jb.lo = jb.lo.cwiseMin(j);
        jb.hi = jb.hi.cwiseMax(j);
    }
    jb.lo.array() -= pad;
    jb.hi.array() += pad;
    return jb;
}

}  // namespace modest
