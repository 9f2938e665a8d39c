#include "modest/observer.hpp"

#include <cmath>
#include <limits>

namespace modest {

IntervalVector propagate(const ModeObserverState& state, const ModeHypothesis& hyp,
                         const IntervalVector& noise_w, const UpdateConfig& /*config*/) {
    const IntervalVector box = concat(state.z, noise_w);
    const AffineAbstraction abs = hyp.f_abstraction_on(box);
    return tight_bound(hyp.f, hyp.f_decomp, abs, box);
}

IntervalVector estimate_input(const IntervalVector& x_framers, const AffineAbstraction& mu_abs) {
    return mu_abs.image(x_framers);
}

UpdateResult measurement_update(const IntervalVector& z_prop, const Vec& y,
                                const ModeHypothesis& hyp, const IntervalVector& noise_v,
                                const UpdateConfig& config) {
    const Eigen::Index nz = z_prop.size();
    const double inf = std::numeric_limits<double>::infinity();

    UpdateResult res;
    res.z = z_prop;
    if (config.record_trace) res.trace.push_back(res.z);

    AffineAbstraction gabs;
    bool have_abs = false;

    for (int i = 1; i <= config.max_update_iters; ++i) {
        if (!have_abs || config.refresh_local_g_abs) {
            gabs = hyp.g_abstraction_on(concat(res.z, noise_v));
            have_abs = true;
        }
        const Mat a = gabs.A.leftCols(nz);
        const Mat w = gabs.A.rightCols(gabs.A.cols() - nz);
        const SignSplit as = sign_split(a);
        const SignSplit ws = sign_split(w);

        const Vec t_hi = y + ws.minus * noise_v.hi - ws.plus * noise_v.lo - gabs.e_lo;
        const Vec t_lo = y - ws.plus * noise_v.hi + ws.minus * noise_v.lo - gabs.e_hi;

        const Vec alpha_hi = t_hi.cwiseMin(as.plus * res.z.hi - as.minus * res.z.lo);
        const Vec alpha_lo = t_lo.cwiseMax(as.plus * res.z.lo - as.minus * res.z.hi);

        const Mat ad = pinv(a, config.pinv_tol);
        const BinVec mask = rowsupp(Mat::Identity(nz, nz) - ad * a, config.rowsupp_tol);
        const SignSplit ds = sign_split(ad);

        Vec cand_hi = ds.plus * alpha_hi - ds.minus * alpha_lo;
        Vec cand_lo = ds.plus * alpha_lo - ds.minus * alpha_hi;
        for (Eigen::Index r = 0; r < nz; ++r) {
            if (mask(r)) {
                if (config.kappa_mask) {
                    cand_hi(r) = inf;
                    cand_lo(r) = -inf;
                } else {
                    cand_hi(r) += config.kappa;
                    cand_lo(r) -= config.kappa;
                }
            }
        }

        const IntervalVector next = intersect({cand_lo, cand_hi}, res.z);
        res.iterations = i;
        if (next.empty(1e-12)) {
            res.empty = true;
            res.z = next;
            if (config.record_trace) res.trace.push_back(next);
            return res;
        }
        const double change = std::max((next.lo - res.z.lo).cwiseAbs().maxCoeff(),
                                       (next.hi - res.z.hi).cwiseAbs().maxCoeff());
        res.z = next;
        if (config.record_trace) res.trace.push_back(res.z);
        if (change < config.update_tol) break;
    }
    return res;
}

ModeObserverState observer_step(ModeObserverState state, const ModeHypothesis& hyp, const Vec& y,
                                const IntervalVector& noise_w, const IntervalVector& noise_v,
                                const UpdateConfig& config) {
    if (!state.alive) return state;

    const IntervalVector x_prop = propagate(state, hyp, noise_w, config);

    IntervalVector z_prop;
    if (hyp.p > 0) {
        const MuAbstractionFn mu_abs_fn =
            hyp.mu_abstraction ? hyp.mu_abstraction : envelope_hull_mu_provider();
        const AffineAbstraction mu_abs = mu_abs_fn(state.envelope, x_prop);
        const IntervalVector d_prop = estimate_input(x_prop, mu_abs);
        z_prop = concat(x_prop, d_prop);
    } else {
        z_prop = x_prop;
    }

    const UpdateResult upd = measurement_update(z_prop, y, hyp, noise_v, config);
    state.z = upd.z;
    state.last_update_empty = upd.empty;
    state.step_index += 1;
    if (upd.empty) {
        state.alive = false;  // recommendation; the mode estimator has the verdict
        return state;
    }

    if (hyp.p > 0) {
        const IntervalVector x_upd = state.x_framers(hyp.n);
        const IntervalVector d_upd = state.d_framers(hyp.n, hyp.p);
        PolicySample s;
        s.x_tilde = x_upd.mid();
        s.d_hi = d_upd.hi;
        s.d_lo = d_upd.lo;
        s.eps = 2.0 * state.envelope.lipschitz * x_upd.width().norm();
        state.envelope = push_sample(std::move(state.envelope), std::move(s));
    }
    return state;
}

BoxAbstractionFn affine_abstraction_provider(Mat A, Vec e_lo, Vec e_hi) {
    return [A = std::move(A), e_lo = std::move(e_lo),
            e_hi = std::move(e_hi)](const IntervalVector& box) {
        AffineAbstraction abs;
        abs.A = A;
        abs.e_lo = e_lo;
        abs.e_hi = e_hi;
        abs.domain = box;
        abs.theta = (e_hi - e_lo).maxCoeff();
        return abs;
    };
}

BoxAbstractionFn lp_abstraction_provider(VectorFn fn, Vec output_lipschitz,
                                         std::size_t sample_budget,
                                         std::optional<AffineAbstraction> global) {
    return [fn = std::move(fn), lip = std::move(output_lipschitz), sample_budget,
            global = std::move(global)](const IntervalVector& box) {
        const std::vector<Vec> samples = default_samples(box, sample_budget);
        // conservative dispersion: the grid helper picked some per-axis count;
        // recover it from the sample count on the active axes
        int per_axis = 17;
        Eigen::Index active = 0;
        for (Eigen::Index i = 0; i < box.size(); ++i)
            if (box.hi(i) - box.lo(i) > 1e-12) ++active;
        if (active > 0)
            per_axis = std::max(
                2, static_cast<int>(std::floor(std::pow(static_cast<double>(samples.size()),
                                                        1.0 / static_cast<double>(active)) +
                                               1e-9)));
        const Vec sigma = sigma_margin(lip, grid_dispersion(box, per_axis));
        return solve_parallel_abstraction(fn, fn, box, samples, sigma,
                                          global ? &*global : nullptr);
    };
}

MuAbstractionFn envelope_hull_mu_provider() {
    return [](const PolicyEnvelope& env, const IntervalVector& box) {
        const IntervalVector hull = envelope_box_hull(env, box);
        AffineAbstraction abs;
        abs.A = Mat::Zero(env.out_dim(), box.size());
        abs.e_lo = hull.lo;
        abs.e_hi = hull.hi;
        abs.domain = box;
        abs.theta = hull.width().size() ? hull.width().maxCoeff() : 0.0;
        return abs;
    };
}

MuAbstractionFn lp_mu_provider(std::size_t sample_budget) {
    return [sample_budget](const PolicyEnvelope& env, const IntervalVector& box) {
        int per_axis = 17;
        Eigen::Index active = 0;
        for (Eigen::Index i = 0; i < box.size(); ++i)
            if (box.hi(i) - box.lo(i) > 1e-12) ++active;
        if (active > 0) {
            while (per_axis > 2 &&
                   std::pow(static_cast<double>(per_axis), static_cast<double>(active)) >
                       static_cast<double>(sample_budget))
                --per_axis;
        }
        const Vec sigma = sigma_margin(env.lipschitz, grid_dispersion(box, per_axis));
        return envelope_abstraction(env, box, sigma, sample_budget);
    };
}

}  // namespace modest
