#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "modest/mode_estimation.hpp"
#include "test_support.hpp"

using namespace modest;
using testsup::Gen;

namespace {

IntervalVector seg(double lo, double hi) {
    return {Vec::Constant(1, lo), Vec::Constant(1, hi)};
}

// x+ = a x + d + w, y = x + d + v, policy abstraction exact mu = c x
ModeHypothesis linear_attack_hyp(int id, double a, double c) {
    ModeHypothesis hyp;
    hyp.mode_id = id;
    hyp.n = 1;
    hyp.p = 1;
    hyp.l = 1;
    hyp.n_w = 1;
    hyp.n_v = 1;
    hyp.actuator_pattern = Mat::Identity(1, 1);
    hyp.sensor_pattern = Mat::Identity(1, 1);
    hyp.f = [a](const Vec& s) { return Vec::Constant(1, a * s(0) + s(1) + s(2)); };
    hyp.g = [](const Vec& s) { return Vec::Constant(1, s(0) + s(1) + s(2)); };
    Mat fj(1, 3);
    fj << a, 1, 1;
    hyp.f_jacobian_bounds = {fj, fj};
    hyp.f_decomp = build_decomposition(hyp.f_jacobian_bounds);
    Mat gj(1, 3);
    gj << 1, 1, 1;
    hyp.g_jacobian_bounds = {gj, gj};
    hyp.g_decomp = build_decomposition(hyp.g_jacobian_bounds);
    hyp.g_lipschitz = Vec::Constant(1, 1.0);
    hyp.local_f_abs = affine_abstraction_provider(fj, Vec::Zero(1), Vec::Zero(1));
    hyp.local_g_abs = affine_abstraction_provider(gj, Vec::Zero(1), Vec::Zero(1));
    hyp.mu_abstraction = [c](const PolicyEnvelope&, const IntervalVector& box) {
        AffineAbstraction abs;
        abs.A = Mat::Constant(1, 1, c);
        abs.e_lo = Vec::Zero(1);
        abs.e_hi = Vec::Zero(1);
        abs.domain = box;
        return abs;
    };
    return hyp;
}

ModeObserverState make_state(const IntervalVector& z) {
    ModeObserverState st;
    st.z = z;
    st.envelope.lipschitz = Vec::Constant(1, 1.0);
    return st;
}

}  // namespace

TEST_CASE("residual midpoint and violation") {
    const ModeHypothesis hyp = linear_attack_hyp(1, 0.5, 0.4);
    const ModeObserverState st =
        make_state({(Vec(2) << 0.0, 0.0).finished(), (Vec(2) << 1.0, 0.5).finished()});
    const IntervalVector noise_v = seg(-0.1, 0.1);

    // predicted g interval: x + d + v over the framers = [-0.1, 1.6]
    const Vec mid_y = Vec::Constant(1, 0.75);
    ResidualRecord rec = residual(hyp, st, mid_y, noise_v);
    CHECK(rec.r(0) == doctest::Approx(0.0));
    CHECK(!rec.violated);
    CHECK(rec.half_width(0) == doctest::Approx(0.85));

    rec = residual(hyp, st, Vec::Constant(1, 2.6), noise_v);  // g_hi + 1
    CHECK(rec.violated);

    rec = residual(hyp, st, Vec::Constant(1, 1.59), noise_v);  // just inside
    CHECK(!rec.violated);
}

TEST_CASE("fuse keeps survivors aligned and throws when empty") {
    const ModeHypothesis h1 = linear_attack_hyp(1, 0.5, 0.4);
    const ModeHypothesis h2 = linear_attack_hyp(2, 0.9, 0.4);
    const ModeObserverState s1 =
        make_state({(Vec(2) << 0.0, 0.0).finished(), (Vec(2) << 1.0, 0.5).finished()});
    const ModeObserverState s2 =
        make_state({(Vec(2) << 2.0, 0.6).finished(), (Vec(2) << 3.0, 0.9).finished()});

    ResidualRecord ok1{1, Vec::Zero(1), Vec::Ones(1), false};
    ResidualRecord ok2{2, Vec::Zero(1), Vec::Ones(1), false};
    ResidualRecord bad2{2, Vec::Constant(1, 5.0), Vec::Ones(1), true};

    FusionResult both = fuse({&h1, &h2}, {&s1, &s2}, {ok1, ok2}, 7);
    CHECK(both.surviving_modes == std::vector<int>{1, 2});
    CHECK(both.x_union.size() == 2);
    // disjoint state intervals stay separate components
    CHECK(both.x_union[0].hi(0) < both.x_union[1].lo(0));

    FusionResult sole = fuse({&h1, &h2}, {&s1, &s2}, {ok1, bad2}, 8);
    CHECK(sole.surviving_modes == std::vector<int>{1});
    REQUIRE(sole.eliminated_this_step.size() == 1);
    CHECK(sole.eliminated_this_step[0].mode_id == 2);
    CHECK(sole.eliminated_this_step[0].reason == EliminationReason::ResidualViolation);
    // the survivor's framers are exactly the observer state's framers
    CHECK((sole.x_union[0].lo - s1.z.segment(0, 1).lo).cwiseAbs().maxCoeff() == 0.0);
    CHECK((sole.d_union[0].hi - s1.z.segment(1, 1).hi).cwiseAbs().maxCoeff() == 0.0);

    ResidualRecord bad1{1, Vec::Constant(1, 5.0), Vec::Ones(1), true};
    CHECK_THROWS_AS((void)fuse({&h1, &h2}, {&s1, &s2}, {bad1, bad2}, 9), AllModesEliminated);
}

TEST_CASE("empty update eliminates with its own reason") {
    const ModeHypothesis h1 = linear_attack_hyp(1, 0.5, 0.4);
    const ModeHypothesis h2 = linear_attack_hyp(2, 0.9, 0.4);
    const ModeObserverState s1 =
        make_state({(Vec(2) << 0.0, 0.0).finished(), (Vec(2) << 1.0, 0.5).finished()});
    ModeObserverState s2 = s1;
    s2.last_update_empty = true;
    ResidualRecord ok1{1, Vec::Zero(1), Vec::Ones(1), false};
    ResidualRecord ok2{2, Vec::Zero(1), Vec::Ones(1), false};
    const FusionResult res = fuse({&h1, &h2}, {&s1, &s2}, {ok1, ok2}, 3);
    CHECK(res.surviving_modes == std::vector<int>{1});
    REQUIRE(res.eliminated_this_step.size() == 1);
    CHECK(res.eliminated_this_step[0].reason == EliminationReason::EmptyIntersection);
}

namespace {

struct MiniTruth {
    std::vector<Vec> y;
    std::vector<double> x, d;
};

MiniTruth simulate_mini(double a, double c, double x0, int horizon, Gen& gen, double wmag,
                        double vmag) {
    MiniTruth t;
    double x = x0;
    for (int k = 1; k <= horizon; ++k) {
        const double d = c * x;
        x = a * x + d + gen.uniform(-wmag, wmag);
        t.x.push_back(x);
        t.d.push_back(c * x);
        t.y.push_back(Vec::Constant(1, x + c * x + gen.uniform(-vmag, vmag)));
    }
    return t;
}

}  // namespace

TEST_CASE("degenerate bank with the true model survives and stays correct") {
    Gen gen(71);
    const double a = 0.6, c = 0.3;
    const double wmag = 0.02, vmag = 0.02;
    const MiniTruth truth = simulate_mini(a, c, 0.4, 50, gen, wmag, vmag);

    std::vector<ModeHypothesis> bank{linear_attack_hyp(1, a, c)};
    // sound initial box around x0 = 0.4 and d0
    const IntervalVector init{(Vec(2) << 0.0, -0.05).finished(),
                              (Vec(2) << 1.0, 0.35).finished()};
    std::vector<PolicyEnvelope> envs(1);
    envs[0].lipschitz = Vec::Constant(1, 1.0);

    SmspRunner runner(bank, init, envs, seg(-wmag, wmag), seg(-vmag, vmag), UpdateConfig{});
    for (int k = 0; k < 50; ++k) {
        const FusionResult res = runner.step(truth.y[k]);
        REQUIRE(res.surviving_modes == std::vector<int>{1});
        CHECK(truth.x[k] >= res.x_union[0].lo(0) - 1e-9);
        CHECK(truth.x[k] <= res.x_union[0].hi(0) + 1e-9);
        CHECK(truth.d[k] >= res.d_union[0].lo(0) - 1e-9);
        CHECK(truth.d[k] <= res.d_union[0].hi(0) + 1e-9);
    }
}

TEST_CASE("hypothesis order does not change per-mode outputs") {
    Gen gen(72);
    const MiniTruth truth = simulate_mini(0.6, 0.3, 0.4, 30, gen, 0.02, 0.02);
    const IntervalVector init{(Vec(2) << 0.0, -0.05).finished(),
                              (Vec(2) << 1.0, 0.35).finished()};

    const auto run_order = [&](std::vector<int> ids) {
        std::vector<ModeHypothesis> bank;
        for (int id : ids) bank.push_back(linear_attack_hyp(id, id == 1 ? 0.6 : 0.9, 0.3));
        std::vector<PolicyEnvelope> envs(bank.size());
        for (auto& e : envs) e.lipschitz = Vec::Constant(1, 1.0);
        SmspRunner runner(bank, init, envs, seg(-0.02, 0.02), seg(-0.02, 0.02), UpdateConfig{});
        std::vector<FusionResult> out;
        for (int k = 0; k < 30; ++k) out.push_back(runner.step(truth.y[k]));
        return out;
    };

    const auto fwd = run_order({1, 2});
    const auto rev = run_order({2, 1});
    for (int k = 0; k < 30; ++k) {
        REQUIRE(fwd[k].surviving_modes.size() == rev[k].surviving_modes.size());
        for (std::size_t i = 0; i < fwd[k].surviving_modes.size(); ++i) {
            const int id = fwd[k].surviving_modes[i];
            const auto pos = std::find(rev[k].surviving_modes.begin(),
                                       rev[k].surviving_modes.end(), id);
            REQUIRE(pos != rev[k].surviving_modes.end());
            const std::size_t j =
                static_cast<std::size_t>(pos - rev[k].surviving_modes.begin());
            CHECK((fwd[k].x_union[i].lo - rev[k].x_union[j].lo).cwiseAbs().maxCoeff() == 0.0);
            CHECK((fwd[k].x_union[i].hi - rev[k].x_union[j].hi).cwiseAbs().maxCoeff() == 0.0);
        }
    }
}

TEST_CASE("wrong dynamics get eliminated on a divergent trajectory") {
    Gen gen(73);
    // unstable truth separates the hypotheses' predictions
    const MiniTruth truth = simulate_mini(1.08, 0.3, 0.5, 200, gen, 0.01, 0.01);
    std::vector<ModeHypothesis> bank{linear_attack_hyp(1, 1.08, 0.3),
                                     linear_attack_hyp(2, 0.5, 0.3)};
    const IntervalVector init{(Vec(2) << 0.3, 0.05).finished(),
                              (Vec(2) << 0.7, 0.25).finished()};
    std::vector<PolicyEnvelope> envs(2);
    for (auto& e : envs) e.lipschitz = Vec::Constant(1, 1.0);

    SmspRunner runner(bank, init, envs, seg(-0.01, 0.01), seg(-0.01, 0.01), UpdateConfig{});
    bool mode2_gone = false;
    for (int k = 0; k < 200 && !mode2_gone; ++k) {
        const FusionResult res = runner.step(truth.y[k]);
        REQUIRE(std::find(res.surviving_modes.begin(), res.surviving_modes.end(), 1) !=
                res.surviving_modes.end());
        mode2_gone = std::find(res.surviving_modes.begin(), res.surviving_modes.end(), 2) ==
                     res.surviving_modes.end();
    }
    CHECK(mode2_gone);
}

TEST_CASE("fused envelopes take the loosest surviving bound") {
    std::vector<ModeHypothesis> bank{linear_attack_hyp(1, 0.6, 0.3),
                                     linear_attack_hyp(2, 0.6, 0.3)};
    const IntervalVector init{(Vec(2) << 0.0, -0.1).finished(),
                              (Vec(2) << 1.0, 0.4).finished()};
    std::vector<PolicyEnvelope> envs(2);
    envs[0].lipschitz = Vec::Constant(1, 1.0);
    envs[1].lipschitz = Vec::Constant(1, 2.0);  // looser cones
    SmspRunner runner(bank, init, envs, seg(0, 0), seg(0, 0), UpdateConfig{});

    const Vec probe = Vec::Constant(1, 2.0);
    const Vec up = runner.fused_mu_upper(probe);
    const Vec lo = runner.fused_mu_lower(probe);
    const Vec up1 = eval_upper(runner.state(1).envelope, probe);
    const Vec up2 = eval_upper(runner.state(2).envelope, probe);
    CHECK(up(0) == doctest::Approx(std::max(up1(0), up2(0))));
    const Vec lo1 = eval_lower(runner.state(1).envelope, probe);
    const Vec lo2 = eval_lower(runner.state(2).envelope, probe);
    CHECK(lo(0) == doctest::Approx(std::min(lo1(0), lo2(0))));
}

TEST_CASE("run_smsp wrapper consumes a stream and reports per-step fusion") {
    Gen gen(74);
    const MiniTruth truth = simulate_mini(0.6, 0.3, 0.4, 25, gen, 0.02, 0.02);
    std::vector<ModeHypothesis> bank{linear_attack_hyp(1, 0.6, 0.3)};
    const IntervalVector init{(Vec(2) << 0.0, -0.05).finished(),
                              (Vec(2) << 1.0, 0.35).finished()};
    std::vector<PolicyEnvelope> envs(1);
    envs[0].lipschitz = Vec::Constant(1, 1.0);

    const std::vector<FusionResult> results =
        run_smsp(bank, truth.y, init, UpdateConfig{}, seg(-0.02, 0.02), seg(-0.02, 0.02), envs);
    REQUIRE(results.size() == truth.y.size());
    for (std::size_t k = 0; k < results.size(); ++k) {
        CHECK(results[k].step == static_cast<long>(k + 1));
        CHECK(results[k].surviving_modes == std::vector<int>{1});
        CHECK(results[k].residuals.size() == 1);
    }
}
