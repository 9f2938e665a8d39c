#include <cmath>

#include "modest/scenario.hpp"

namespace modest {
namespace {

constexpr double kPi = 3.14159265358979323846;

struct SinEnclosure {
    double slope = 0.0, e_lo = 0.0, e_hi = 0.0;  // slope*u + [e_lo, e_hi] covers sin(u)
};

// Tight affine sandwich of sin over [lo, hi]: secant slope, offsets from the
// exact extrema of sin(u) - a*u (critical points cos(u) = a).
SinEnclosure sin_enclosure(double lo, double hi) {
    SinEnclosure enc;
    if (hi - lo < 1e-12) {
        enc.slope = 0.0;
        enc.e_lo = enc.e_hi = std::sin(0.5 * (lo + hi));
        return enc;
    }
    enc.slope = (std::sin(hi) - std::sin(lo)) / (hi - lo);
    const auto phi = [&](double u) { return std::sin(u) - enc.slope * u; };
    double mn = std::min(phi(lo), phi(hi));
    double mx = std::max(phi(lo), phi(hi));
    const double a = std::clamp(enc.slope, -1.0, 1.0);
    const double base = std::acos(a);
    const long k0 = static_cast<long>(std::floor(lo / (2.0 * kPi))) - 1;
    const long k1 = static_cast<long>(std::ceil(hi / (2.0 * kPi))) + 1;
    for (long k = k0; k <= k1; ++k) {
        for (const double u : {base + 2.0 * kPi * k, -base + 2.0 * kPi * k}) {
            if (u >= lo && u <= hi) {
                mn = std::min(mn, phi(u));
                mx = std::max(mx, phi(u));
            }
        }
    }
    enc.e_lo = mn;
    enc.e_hi = mx;
    return enc;
}

std::pair<double, double> cos_range(double lo, double hi) {
    if (hi - lo >= 2.0 * kPi) return {-1.0, 1.0};
    double mn = std::min(std::cos(lo), std::cos(hi));
    double mx = std::max(std::cos(lo), std::cos(hi));
    const long k0 = static_cast<long>(std::floor(lo / kPi)) - 1;
    const long k1 = static_cast<long>(std::ceil(hi / kPi)) + 1;
    for (long k = k0; k <= k1; ++k) {
        const double u = kPi * k;  // extrema of cos
        if (u >= lo && u <= hi) {
            const double c = std::cos(u);
            mn = std::min(mn, c);
            mx = std::max(mx, c);
        }
    }
    return {mn, mx};
}

// Range of theta*sin(theta) over [lo, hi]: dense grid plus derivative pad.
std::pair<double, double> policy_range(double lo, double hi) {
    const int kGrid = 4096;
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    double max_slope = 0.0;
    for (int i = 0; i <= kGrid; ++i) {
        const double t = lo + (hi - lo) * i / kGrid;
        const double v = t * std::sin(t);
        mn = std::min(mn, v);
        mx = std::max(mx, v);
        max_slope = std::max(max_slope, std::abs(std::sin(t) + t * std::cos(t)));
    }
    const double spacing = (hi - lo) / kGrid;
    const double pad = 0.5 * spacing * (max_slope + spacing * (2.0 + std::abs(hi) + std::abs(lo)));
    return {mn - pad, mx + pad};
}

std::pair<double, double> policy_slope_range(double lo, double hi) {
    const int kGrid = 4096;
    double mn = std::numeric_limits<double>::infinity(), mx = -mn;
    for (int i = 0; i <= kGrid; ++i) {
        const double t = lo + (hi - lo) * i / kGrid;
        const double s = std::sin(t) + t * std::cos(t);  // d/dt (t sin t)
        mn = std::min(mn, s);
        mx = std::max(mx, s);
    }
    const double spacing = (hi - lo) / kGrid;
    const double pad = 0.5 * spacing * (2.0 + std::max(std::abs(lo), std::abs(hi)));
    return {mn - pad, mx + pad};
}

}  // namespace

Vec PowerNetModel::policy(const Vec& x) const {
    Vec d(areas);
    for (int i = 0; i < areas; ++i) {
        const double theta = x(2 * i);
        d(i) = theta * std::sin(theta);
    }
    return d;
}

std::vector<int> PowerNetModel::active_lines(int mode) const {
    std::vector<int> active;
    for (int li = 0; li < static_cast<int>(lines.size()); ++li) {
        const TieLine& ln = lines[li];
        bool cut = false;
        if (mode >= 2 && mode <= 1 + areas) {
            const int attacked = mode - 1;  // node attack severs all incident lines
            cut = (ln.from == attacked || ln.to == attacked);
        } else if (mode == 2 + areas) {
            for (int q5 : q5_cut_lines)
                if (q5 == li) cut = true;
        }
        if (!cut) active.push_back(li);
    }
    return active;
}

Vec PowerNetModel::dynamics(int mode, const Vec& x, const Vec& d, const Vec& w) const {
    Vec flow = Vec::Zero(areas);  // sum of P_il at each area
    for (const int li : active_lines(mode)) {
        const TieLine& ln = lines[li];
        const double p = ln.gain * std::sin(x(2 * (ln.from - 1)) - x(2 * (ln.to - 1)));
        flow(ln.from - 1) += p;
        flow(ln.to - 1) -= p;
    }
    Vec next(n());
    for (int i = 0; i < areas; ++i) {
        const double theta = x(2 * i), freq = x(2 * i + 1);
        next(2 * i) = theta + dt * (freq + w(2 * i));
        next(2 * i + 1) =
            freq + dt * (-(damping(i) * freq + flow(i) - d(i)) / inertia(i) + w(2 * i + 1));
    }
    return next;
}

Vec PowerNetModel::output(const Vec& x, const Vec& d, const Vec& v) const {
    Vec y(l());
    for (int i = 0; i < areas; ++i) {
        y(2 * i) = x(2 * i) + v(2 * i);
        y(2 * i + 1) = x(2 * i + 1) + d(i) + v(2 * i + 1);
    }
    return y;
}

namespace {

// Affine enclosure of the mode dynamics over a stacked (x, d, w) box.
AffineAbstraction powernet_f_abstraction(const PowerNetModel& model,
                                         const std::vector<int>& active,
                                         const IntervalVector& box) {
    const int n = model.n(), p = model.p(), nw = model.n();
    const int cols = n + p + nw;
    AffineAbstraction abs;
    abs.A = Mat::Zero(n, cols);
    abs.e_lo = Vec::Zero(n);
    abs.e_hi = Vec::Zero(n);
    abs.domain = box;
    const double dt = model.dt;

    for (int i = 0; i < model.areas; ++i) {
        const int rt = 2 * i, rf = 2 * i + 1;
        abs.A(rt, 2 * i) = 1.0;
        abs.A(rt, 2 * i + 1) = dt;
        abs.A(rt, n + p + 2 * i) = dt;  // w1_i
        abs.A(rf, 2 * i + 1) = 1.0 - dt * model.damping(i) / model.inertia(i);
        abs.A(rf, n + i) = dt / model.inertia(i);  // d_i
        abs.A(rf, n + p + 2 * i + 1) = dt;         // w2_i
    }
    for (const int li : active) {
        const TieLine& ln = model.lines[li];
        const int a = ln.from - 1, b = ln.to - 1;
        const double ulo = box.lo(2 * a) - box.hi(2 * b);
        const double uhi = box.hi(2 * a) - box.lo(2 * b);
        const SinEnclosure enc = sin_enclosure(ulo, uhi);
        const double ca = dt * ln.gain / model.inertia(a);  // -ca * sin(u) enters f_a
        const double cb = dt * ln.gain / model.inertia(b);  // +cb * sin(u) enters f_b
        abs.A(2 * a + 1, 2 * a) -= ca * enc.slope;
        abs.A(2 * a + 1, 2 * b) += ca * enc.slope;
        abs.e_lo(2 * a + 1) += -ca * enc.e_hi;
        abs.e_hi(2 * a + 1) += -ca * enc.e_lo;
        abs.A(2 * b + 1, 2 * a) += cb * enc.slope;
        abs.A(2 * b + 1, 2 * b) -= cb * enc.slope;
        abs.e_lo(2 * b + 1) += cb * enc.e_lo;
        abs.e_hi(2 * b + 1) += cb * enc.e_hi;
    }
    abs.theta = (abs.e_hi - abs.e_lo).maxCoeff();
    return abs;
}

Mat powernet_g_slope(const PowerNetModel& model) {
    const int n = model.n(), p = model.p(), nv = model.l();
    Mat a = Mat::Zero(model.l(), n + p + nv);
    for (int i = 0; i < model.areas; ++i) {
        a(2 * i, 2 * i) = 1.0;
        a(2 * i + 1, 2 * i + 1) = 1.0;
        a(2 * i + 1, n + i) = 1.0;
    }
    a.rightCols(nv) = Mat::Identity(nv, nv);
    return a;
}

// Entrywise Jacobian bounds of the mode dynamics over all of R^n (cos terms
// bounded by [-1, 1]); keeps the decomposition valid wherever the framers go.
JacobianBounds powernet_f_jacobian(const PowerNetModel& model, const std::vector<int>& active) {
    const int n = model.n(), p = model.p(), nw = model.n();
    JacobianBounds jb;
    jb.lo = Mat::Zero(n, n + p + nw);
    jb.hi = Mat::Zero(n, n + p + nw);
    const double dt = model.dt;
    for (int i = 0; i < model.areas; ++i) {
        const int rt = 2 * i, rf = 2 * i + 1;
        jb.lo(rt, 2 * i) = jb.hi(rt, 2 * i) = 1.0;
        jb.lo(rt, 2 * i + 1) = jb.hi(rt, 2 * i + 1) = dt;
        jb.lo(rt, n + p + 2 * i) = jb.hi(rt, n + p + 2 * i) = dt;
        const double ff = 1.0 - dt * model.damping(i) / model.inertia(i);
        jb.lo(rf, 2 * i + 1) = jb.hi(rf, 2 * i + 1) = ff;
        jb.lo(rf, n + i) = jb.hi(rf, n + i) = dt / model.inertia(i);
        jb.lo(rf, n + p + 2 * i + 1) = jb.hi(rf, n + p + 2 * i + 1) = dt;
    }
    for (const int li : active) {
        const TieLine& ln = model.lines[li];
        const int a = ln.from - 1, b = ln.to - 1;
        const double ca = dt * ln.gain / model.inertia(a);
        const double cb = dt * ln.gain / model.inertia(b);
        jb.lo(2 * a + 1, 2 * a) += -ca;
        jb.hi(2 * a + 1, 2 * a) += ca;
        jb.lo(2 * a + 1, 2 * b) += -ca;
        jb.hi(2 * a + 1, 2 * b) += ca;
        jb.lo(2 * b + 1, 2 * a) += -cb;
        jb.hi(2 * b + 1, 2 * a) += cb;
        jb.lo(2 * b + 1, 2 * b) += -cb;
        jb.hi(2 * b + 1, 2 * b) += cb;
    }
    return jb;
}

JacobianBounds powernet_g_jacobian(const PowerNetModel& model) {
    const Mat slope = powernet_g_slope(model);
    return {slope, slope};
}

}  // namespace

std::vector<ModeHypothesis> build_powernet(const ScenarioConfig& cfg) {
    const PowerNetModel& model = cfg.model;
    if (model.areas != 3) throw ConfigError("build_powernet: only 3-area networks supported");
    if (cfg.true_mode < 1 || cfg.true_mode > model.mode_count())
        throw ConfigError("build_powernet: true_mode out of range");
    if (cfg.lipschitz.size() != model.p())
        throw ConfigError("build_powernet: lipschitz must have one entry per policy channel");

    const int n = model.n(), p = model.p(), l = model.l();
    const Mat g_slope = powernet_g_slope(model);
    const IntervalVector op_x = cfg.operating_box;
    IntervalVector op_d;
    op_d.lo = Vec(p);
    op_d.hi = Vec(p);
    for (int i = 0; i < p; ++i) {
        const auto [dlo, dhi] = policy_range(op_x.lo(2 * i), op_x.hi(2 * i));
        op_d.lo(i) = dlo;
        op_d.hi(i) = dhi;
    }
    const IntervalVector op_zw = concat(concat(op_x, op_d), model.noise_w);
    const IntervalVector op_zv = concat(concat(op_x, op_d), model.noise_v);

    std::vector<ModeHypothesis> hyps;
    for (int q = 1; q <= model.mode_count(); ++q) {
        ModeHypothesis hyp;
        hyp.mode_id = q;
        hyp.n = n;
        hyp.p = p;
        hyp.l = l;
        hyp.n_w = n;
        hyp.n_v = l;
        hyp.actuator_pattern = Mat::Identity(p, p);
        hyp.sensor_pattern = Mat::Identity(p, p);

        const std::vector<int> active = model.active_lines(q);
        hyp.f = [model, q](const Vec& stacked) {
            const int n = model.n(), p = model.p();
            return model.dynamics(q, stacked.head(n), stacked.segment(n, p),
                                  stacked.tail(model.n()));
        };
        hyp.g = [model](const Vec& stacked) {
            const int n = model.n(), p = model.p();
            return model.output(stacked.head(n), stacked.segment(n, p), stacked.tail(model.l()));
        };

        hyp.f_jacobian_bounds = powernet_f_jacobian(model, active);
        hyp.g_jacobian_bounds = powernet_g_jacobian(model);
        hyp.f_decomp = build_decomposition(hyp.f_jacobian_bounds);
        hyp.g_decomp = build_decomposition(hyp.g_jacobian_bounds);
        hyp.g_lipschitz = Vec::Constant(l, g_slope.cwiseAbs().rowwise().sum().maxCoeff());

        hyp.global_f_abs = powernet_f_abstraction(model, active, op_zw);
        AffineAbstraction gabs;
        gabs.A = g_slope;
        gabs.e_lo = Vec::Zero(l);
        gabs.e_hi = Vec::Zero(l);
        gabs.domain = op_zv;
        gabs.theta = 0.0;
        hyp.global_g_abs = gabs;

        hyp.local_f_abs = [model, active](const IntervalVector& box) {
            return powernet_f_abstraction(model, active, box);
        };
        hyp.local_g_abs = affine_abstraction_provider(g_slope, Vec::Zero(l), Vec::Zero(l));
        // envelope hull clamped by the given global policy sandwich (the
        // abstraction-LP containment constraints collapse to an intersection
        // for zero-slope sandwiches)
        const IntervalVector cap = cfg.attack_bound;
        hyp.mu_abstraction = [cap](const PolicyEnvelope& env, const IntervalVector& box) {
            const IntervalVector hull = intersect(envelope_box_hull(env, box), cap);
            AffineAbstraction abs;
            abs.A = Mat::Zero(env.out_dim(), box.size());
            abs.e_lo = hull.lo;
            abs.e_hi = hull.hi;
            abs.domain = box;
            abs.theta = hull.width().size() ? hull.width().maxCoeff() : 0.0;
            return abs;
        };

        hyps.push_back(std::move(hyp));
    }
    return hyps;
}

TruthTrace simulate_truth(const PowerNetModel& model, int true_mode, long horizon,
                          std::uint64_t seed, const IntervalVector& initial_box) {
    if (true_mode < 1 || true_mode > model.mode_count())
        throw ConfigError("simulate_truth: true_mode out of range");
    if (initial_box.size() != model.n())
        throw ConfigError("simulate_truth: initial box dimension");
    Rng rng(seed);
    TruthTrace out;
    out.x.reserve(horizon + 1);
    out.d.reserve(horizon + 1);
    out.y.reserve(horizon);

    out.x.push_back(rng.uniform_box(initial_box));
    out.d.push_back(model.policy(out.x.back()));
    for (long k = 1; k <= horizon; ++k) {
        const Vec w = rng.uniform_box(model.noise_w);
        out.x.push_back(model.dynamics(true_mode, out.x[k - 1], out.d[k - 1], w));
        out.d.push_back(model.policy(out.x[k]));
        const Vec v = rng.uniform_box(model.noise_v);
        out.y.push_back(model.output(out.x[k], out.d[k], v));
    }
    return out;
}

std::vector<PolicyEnvelope> warm_start_policy(const PowerNetModel& model,
                                              const ScenarioConfig& cfg) {
    std::vector<PolicyEnvelope> envs;
    const int p = model.p();
    const long count = cfg.initial_policy_samples;
    int per_axis = 1;
    while (std::pow(per_axis + 1, model.areas) <= count) ++per_axis;

    std::vector<PolicySample> samples;
    if (count > 0) {
        const double hw = cfg.warm_start_halfwidth;
        const double center = cfg.warm_start_center;
        std::vector<int> counter(model.areas, 0);
        while (true) {
            Vec x = Vec::Zero(model.n());
            for (int i = 0; i < model.areas; ++i) {
                const double t = per_axis == 1
                                     ? center
                                     : center - hw + 2.0 * hw * counter[i] / (per_axis - 1);
                x(2 * i) = t;
            }
            PolicySample s;
            s.x_tilde = x;
            const Vec d = model.policy(x);
            s.d_hi = d;
            s.d_lo = d;
            s.eps = Vec::Zero(p);
            samples.push_back(std::move(s));
            int k = 0;
            for (; k < model.areas; ++k) {
                if (++counter[k] < per_axis) break;
                counter[k] = 0;
            }
            if (k == model.areas) break;
        }
    }

    for (int q = 1; q <= model.mode_count(); ++q) {
        PolicyEnvelope env;
        env.lipschitz = cfg.lipschitz;
        env.window = 0;
        env.samples = samples;
        envs.push_back(std::move(env));
    }
    return envs;
}

IntervalVector initial_augmented_box(const PowerNetModel& model, const IntervalVector& x_box) {
    const int p = model.p();
    IntervalVector d_box;
    d_box.lo = Vec(p);
    d_box.hi = Vec(p);
    for (int i = 0; i < p; ++i) {
        const auto [lo, hi] = policy_range(x_box.lo(2 * i), x_box.hi(2 * i));
        d_box.lo(i) = lo;
        d_box.hi(i) = hi;
    }
    return concat(x_box, d_box);
}

WidthModel build_width_model(const ScenarioConfig& cfg, const ModeHypothesis& hyp) {
    const int n = hyp.n, p = hyp.p;
    WidthModel wm;
    const Mat a_g = hyp.global_g_abs.A.leftCols(n + p);
    const Mat w_g = hyp.global_g_abs.A.rightCols(hyp.n_v);
    wm.A_g_abs = a_g.cwiseAbs();
    wm.A_g_dagger_abs = pinv(a_g).cwiseAbs();
    wm.W_g_abs = w_g.cwiseAbs();
    wm.delta_e_g = hyp.global_g_abs.e_hi - hyp.global_g_abs.e_lo;

    const Mat a_f = hyp.global_f_abs.A.leftCols(n + p);
    const Mat w_f = hyp.global_f_abs.A.rightCols(hyp.n_w);
    wm.A_f_abs = a_f.cwiseAbs();
    wm.W_f_abs = w_f.cwiseAbs();
    wm.delta_e_f = hyp.global_f_abs.e_hi - hyp.global_f_abs.e_lo;

    wm.C_f_z = hyp.f_decomp.C.leftCols(n + p);
    wm.C_f_w = hyp.f_decomp.C.rightCols(hyp.n_w);

    wm.A_mu_abs = Mat::Zero(p, n);  // envelope-hull provider has zero slope
    IntervalVector op_d;
    op_d.lo = Vec(p);
    op_d.hi = Vec(p);
    for (int i = 0; i < p; ++i) {
        const auto [dlo, dhi] = policy_range(cfg.operating_box.lo(2 * i),
                                             cfg.operating_box.hi(2 * i));
        op_d.lo(i) = dlo;
        op_d.hi(i) = dhi;
    }
    wm.delta_e_mu = op_d.width();  // representative policy-hull width

    wm.delta_w = cfg.model.noise_w.width();
    wm.delta_v = cfg.model.noise_v.width();
    wm.r_mask = rowsupp(Mat::Identity(n + p, n + p) - pinv(a_g) * a_g, 1e-9);
    return wm;
}

std::vector<ModeAnalysis> analyze_scenario(const ScenarioConfig& cfg) {
    const std::vector<ModeHypothesis> hyps = build_powernet(cfg);
    std::vector<ModeAnalysis> out;
    const PowerNetModel& model = cfg.model;
    const int n = model.n(), p = model.p();

    for (const ModeHypothesis& hyp : hyps) {
        ModeAnalysis ma;
        ma.mode_id = hyp.mode_id;
        ma.certificate = stability_search(build_width_model(cfg, hyp));

        // Jacobian intervals over the assumption box
        IntervalMatrix jfx{Mat::Zero(n, n), Mat::Zero(n, n)};
        IntervalMatrix jfd{Mat::Zero(n, p), Mat::Zero(n, p)};
        IntervalMatrix jmu{Mat::Zero(p, n), Mat::Zero(p, n)};
        const double dt = model.dt;
        for (int i = 0; i < model.areas; ++i) {
            jfx.lo(2 * i, 2 * i) = jfx.hi(2 * i, 2 * i) = 1.0;
            jfx.lo(2 * i, 2 * i + 1) = jfx.hi(2 * i, 2 * i + 1) = dt;
            const double ff = 1.0 - dt * model.damping(i) / model.inertia(i);
            jfx.lo(2 * i + 1, 2 * i + 1) = jfx.hi(2 * i + 1, 2 * i + 1) = ff;
            jfd.lo(2 * i + 1, i) = jfd.hi(2 * i + 1, i) = dt / model.inertia(i);
            const auto [slo, shi] = policy_slope_range(cfg.assumption_box.lo(2 * i),
                                                       cfg.assumption_box.hi(2 * i));
            jmu.lo(i, 2 * i) = slo;
            jmu.hi(i, 2 * i) = shi;
        }
        for (const int li : model.active_lines(hyp.mode_id)) {
            const TieLine& ln = model.lines[li];
            const int a = ln.from - 1, b = ln.to - 1;
            const double ulo = cfg.assumption_box.lo(2 * a) - cfg.assumption_box.hi(2 * b);
            const double uhi = cfg.assumption_box.hi(2 * a) - cfg.assumption_box.lo(2 * b);
            const auto [clo, chi] = cos_range(ulo, uhi);
            const double ca = dt * ln.gain / model.inertia(a);
            const double cb = dt * ln.gain / model.inertia(b);
            jfx.lo(2 * a + 1, 2 * a) += -ca * chi;
            jfx.hi(2 * a + 1, 2 * a) += -ca * clo;
            jfx.lo(2 * a + 1, 2 * b) += ca * clo;
            jfx.hi(2 * a + 1, 2 * b) += ca * chi;
            jfx.lo(2 * b + 1, 2 * a) += cb * clo;
            jfx.hi(2 * b + 1, 2 * a) += cb * chi;
            jfx.lo(2 * b + 1, 2 * b) += -cb * chi;
            jfx.hi(2 * b + 1, 2 * b) += -cb * clo;
        }
        ma.instability = schur_instability_check(jfx, jfd, jmu);
        out.push_back(std::move(ma));
    }
    return out;
}

}  // namespace modest
