#include "modest/abstraction.hpp"

#include <cmath>

namespace modest {

IntervalVector AffineAbstraction::image(const IntervalVector& box) const {
    const SignSplit s = sign_split(A);
    IntervalVector out;
    out.hi = s.plus * box.hi - s.minus * box.lo + e_hi;
    out.lo = s.plus * box.lo - s.minus * box.hi + e_lo;
    return out;
}

Vec sigma_margin(const Vec& lipschitz, double dispersion) {
    return lipschitz * dispersion;
}

namespace {

constexpr int kVertexDimCap = 12;
constexpr double kDegenerateWidth = 1e-12;

std::vector<Eigen::Index> active_axes(const IntervalVector& box) {
    std::vector<Eigen::Index> idx;
    for (Eigen::Index i = 0; i < box.size(); ++i)
        if (box.hi(i) - box.lo(i) > kDegenerateWidth) idx.push_back(i);
    return idx;
}

}  // namespace

std::vector<Vec> box_vertices(const IntervalVector& box) {
    const auto axes = active_axes(box);
    if (axes.size() > kVertexDimCap)
        throw UnsupportedDimension("box_vertices: more than 2^12 corners (dim " +
                                   std::to_string(axes.size()) + ")");
    const std::size_t count = std::size_t{1} << axes.size();
    std::vector<Vec> verts;
    verts.reserve(count);
    for (std::size_t mask = 0; mask < count; ++mask) {
        Vec v = box.lo;
        for (std::size_t k = 0; k < axes.size(); ++k)
            if (mask & (std::size_t{1} << k)) v(axes[k]) = box.hi(axes[k]);
        verts.push_back(std::move(v));
    }
    return verts;
}

std::vector<Vec> grid_samples(const IntervalVector& box, int per_axis) {
    const auto axes = active_axes(box);
    if (per_axis < 2) per_axis = 2;
    double total = 1.0;
    for (std::size_t k = 0; k < axes.size(); ++k) {
        total *= per_axis;
        if (total > 1e7) throw UnsupportedDimension("grid_samples: grid too large");
    }
    std::vector<Vec> out;
    out.reserve(static_cast<std::size_t>(total));
    Vec v = box.mid();
    std::vector<int> counter(axes.size(), 0);
    while (true) {
        for (std::size_t k = 0; k < axes.size(); ++k) {
            const Eigen::Index ax = axes[k];
            v(ax) = box.lo(ax) + (box.hi(ax) - box.lo(ax)) * counter[k] / (per_axis - 1);
        }
        out.push_back(v);
        std::size_t k = 0;
        for (; k < axes.size(); ++k) {
            if (++counter[k] < per_axis) break;
            counter[k] = 0;
        }
        if (k == axes.size()) break;
    }
    return out;
}

double grid_dispersion(const IntervalVector& box, int per_axis) {
    if (per_axis < 2) per_axis = 2;
    double sq = 0.0;
    for (Eigen::Index i = 0; i < box.size(); ++i) {
        const double w = box.hi(i) - box.lo(i);
        if (w > kDegenerateWidth) {
            const double cell = w / (per_axis - 1);
            sq += 0.25 * cell * cell;
        }
    }
    return std::sqrt(sq);
}

std::vector<Vec> default_samples(const IntervalVector& box, std::size_t budget) {
    const auto axes = active_axes(box);
    int per_axis = 17;  // dispersion <= width/16 when affordable
    while (per_axis > 2 &&
           std::pow(static_cast<double>(per_axis), static_cast<double>(axes.size())) >
               static_cast<double>(budget))
        --per_axis;
    std::vector<Vec> samples = grid_samples(box, per_axis);
    if (per_axis % 2 == 0) {
        // even grids miss the center; binding points often sit there
        samples.push_back(box.mid());
    }
    return samples;
}

AffineAbstraction solve_parallel_abstraction(const VectorFn& psi_lo, const VectorFn& psi_hi,
                                             const IntervalVector& domain,
                                             const std::vector<Vec>& samples, const Vec& sigma,
                                             const AffineAbstraction* global_abs) {
    if (samples.empty()) throw std::invalid_argument("solve_parallel_abstraction: no samples");
    const Eigen::Index n_full = domain.size();
    const auto axes = active_axes(domain);
    const Eigen::Index n = static_cast<Eigen::Index>(axes.size());
    const Eigen::Index m = psi_lo(samples.front()).size();
    if (sigma.size() != m) throw DimensionError("solve_parallel_abstraction: sigma size");

    // variables: [theta, A (m x n, row-major, active axes only), e_hi (m), e_lo (m)]
    const Eigen::Index nv = 1 + m * n + 2 * m;
    const auto a_var = [&](Eigen::Index j, Eigen::Index k) { return 1 + j * n + k; };
    const auto ehi_var = [&](Eigen::Index j) { return 1 + m * n + j; };
    const auto elo_var = [&](Eigen::Index j) { return 1 + m * n + m + j; };

    std::vector<Vec> verts;
    if (global_abs != nullptr) verts = box_vertices(domain);

    const Eigen::Index rows =
        2 * m * static_cast<Eigen::Index>(samples.size()) + m +
        2 * m * static_cast<Eigen::Index>(verts.size());
    Mat g = Mat::Zero(rows, nv);
    Vec h = Vec::Zero(rows);
    Eigen::Index r = 0;

    for (const Vec& x : samples) {
        const Vec lo_val = psi_lo(x);
        const Vec hi_val = psi_hi(x);
        for (Eigen::Index j = 0; j < m; ++j) {
            // A_j x + e_lo_j <= psi_lo_j(x) - sigma_j
            for (Eigen::Index k = 0; k < n; ++k) g(r, a_var(j, k)) = x(axes[k]);
            g(r, elo_var(j)) = 1.0;
            h(r) = lo_val(j) - sigma(j);
            ++r;
            // -A_j x - e_hi_j <= -psi_hi_j(x) - sigma_j
            for (Eigen::Index k = 0; k < n; ++k) g(r, a_var(j, k)) = -x(axes[k]);
            g(r, ehi_var(j)) = -1.0;
            h(r) = -hi_val(j) - sigma(j);
            ++r;
        }
    }
    for (Eigen::Index j = 0; j < m; ++j) {
        // e_hi_j - e_lo_j - theta <= 2 sigma_j
        g(r, ehi_var(j)) = 1.0;
        g(r, elo_var(j)) = -1.0;
        g(r, 0) = -1.0;
        h(r) = 2.0 * sigma(j);
        ++r;
    }
    if (global_abs != nullptr) {
        if (global_abs->A.rows() != m || global_abs->A.cols() != n_full)
            throw DimensionError("solve_parallel_abstraction: global abstraction shape");
        for (const Vec& x : verts) {
            const Vec gx = global_abs->A * x;
            for (Eigen::Index j = 0; j < m; ++j) {
                // -A_j x - e_lo_j <= -(global_A_j x) - global_e_lo_j
                for (Eigen::Index k = 0; k < n; ++k) g(r, a_var(j, k)) = -x(axes[k]);
                g(r, elo_var(j)) = -1.0;
                h(r) = -gx(j) - global_abs->e_lo(j);
                ++r;
                // A_j x + e_hi_j <= global_A_j x + global_e_hi_j
                for (Eigen::Index k = 0; k < n; ++k) g(r, a_var(j, k)) = x(axes[k]);
                g(r, ehi_var(j)) = 1.0;
                h(r) = gx(j) + global_abs->e_hi(j);
                ++r;
            }
        }
    }

    LpProblem lp;
    lp.objective = Vec::Zero(nv);
    lp.objective(0) = 1.0;
    lp.ineq_A = std::move(g);
    lp.ineq_b = std::move(h);

    const LpSolution sol = lp_solve(lp);
    if (sol.status == LpStatus::Infeasible)
        throw AbstractionInfeasible("parallel abstraction LP infeasible (sigma too large?)");
    if (sol.status != LpStatus::Optimal)
        throw NumericalFailure("parallel abstraction LP unbounded");

    AffineAbstraction out;
    out.A = Mat::Zero(m, n_full);
    for (Eigen::Index j = 0; j < m; ++j)
        for (Eigen::Index k = 0; k < n; ++k) out.A(j, axes[k]) = sol.x(a_var(j, k));
    out.e_hi.resize(m);
    out.e_lo.resize(m);
    for (Eigen::Index j = 0; j < m; ++j) {
        out.e_hi(j) = sol.x(ehi_var(j));
        out.e_lo(j) = sol.x(elo_var(j));
    }
    out.domain = domain;
    out.theta = sol.objective_value;
    return out;
}

ValidationReport validate(const AffineAbstraction& abs, const VectorFn& psi_lo,
                          const VectorFn& psi_hi, const std::vector<Vec>& test_points,
                          double tol) {
    ValidationReport rep;
    rep.worst_violation = 0.0;
    for (const Vec& x : test_points) {
        const Vec base = abs.A * x;
        const Vec lo_gap = psi_lo(x) - (base + abs.e_lo);   // should be >= 0
        const Vec hi_gap = (base + abs.e_hi) - psi_hi(x);   // should be >= 0
        rep.worst_violation = std::max({rep.worst_violation,
                                        lo_gap.size() ? -lo_gap.minCoeff() : 0.0,
                                        hi_gap.size() ? -hi_gap.minCoeff() : 0.0});
    }
    rep.ok = rep.worst_violation <= tol;
    return rep;
}

}  // namespace modest
