#include "modest/mode_estimation.hpp"

#include <algorithm>

namespace modest {

ResidualRecord residual(const ModeHypothesis& hyp, const ModeObserverState& state, const Vec& y,
                        const IntervalVector& noise_v) {
    const IntervalVector box = concat(state.z, noise_v);
    const AffineAbstraction abs = hyp.g_abstraction_on(box);
    const IntervalVector g_bounds = tight_bound(hyp.g, hyp.g_decomp, abs, box);

    ResidualRecord rec;
    rec.mode_id = hyp.mode_id;
    rec.r = y - 0.5 * (g_bounds.hi + g_bounds.lo);
    rec.half_width = 0.5 * (g_bounds.hi - g_bounds.lo);
    rec.violated =
        (rec.r.cwiseAbs().array() > rec.half_width.array() + ResidualRecord::kMembershipSlack)
            .any();
    return rec;
}

FusionResult fuse(const std::vector<const ModeHypothesis*>& hyps,
                  const std::vector<const ModeObserverState*>& states,
                  const std::vector<ResidualRecord>& records, long step) {
    if (hyps.size() != states.size() || hyps.size() != records.size())
        throw DimensionError("fuse: misaligned inputs");

    FusionResult out;
    out.step = step;
    for (std::size_t i = 0; i < hyps.size(); ++i) {
        out.residuals.push_back(records[i]);
        if (states[i]->last_update_empty) {
            out.eliminated_this_step.push_back(
                {hyps[i]->mode_id, EliminationReason::EmptyIntersection});
            continue;
        }
        if (records[i].violated) {
            out.eliminated_this_step.push_back(
                {hyps[i]->mode_id, EliminationReason::ResidualViolation});
            continue;
        }
        out.surviving_modes.push_back(hyps[i]->mode_id);
        out.x_union.push_back(states[i]->x_framers(hyps[i]->n));
        out.d_union.push_back(states[i]->d_framers(hyps[i]->n, hyps[i]->p));
    }
    if (out.surviving_modes.empty()) throw AllModesEliminated(step);
    return out;
}

SmspRunner::SmspRunner(std::vector<ModeHypothesis> hyps, IntervalVector init_z,
                       std::vector<PolicyEnvelope> init_envelopes, IntervalVector noise_w,
                       IntervalVector noise_v, UpdateConfig config)
    : hyps_(std::move(hyps)),
      noise_w_(std::move(noise_w)),
      noise_v_(std::move(noise_v)),
      config_(config) {
    if (hyps_.empty()) throw std::invalid_argument("SmspRunner: empty hypothesis bank");
    if (init_envelopes.size() != hyps_.size())
        throw DimensionError("SmspRunner: one initial envelope per hypothesis required");
    init_z.checked();
    states_.reserve(hyps_.size());
    for (std::size_t i = 0; i < hyps_.size(); ++i) {
        ModeObserverState st;
        st.z = init_z;
        st.envelope = std::move(init_envelopes[i]);
        if (hyps_[i].p > 0) {
            // seed the data set from the initial framers so the input
            // estimation is defined from the very first step
            st.envelope = push_sample(
                std::move(st.envelope),
                initial_policy_sample(init_z, hyps_[i].n, hyps_[i].p, st.envelope.lipschitz));
        }
        states_.push_back(std::move(st));
        surviving_.push_back(hyps_[i].mode_id);
    }
}

const ModeObserverState& SmspRunner::state(int mode_id) const {
    for (std::size_t i = 0; i < hyps_.size(); ++i)
        if (hyps_[i].mode_id == mode_id) return states_[i];
    throw std::invalid_argument("SmspRunner: unknown mode id");
}

const ModeHypothesis& SmspRunner::hypothesis(int mode_id) const {
    for (const auto& h : hyps_)
        if (h.mode_id == mode_id) return h;
    throw std::invalid_argument("SmspRunner: unknown mode id");
}

FusionResult SmspRunner::step(const Vec& y) {
    ++step_;
    std::vector<std::size_t> alive_idx;
    for (std::size_t i = 0; i < hyps_.size(); ++i)
        if (states_[i].alive) alive_idx.push_back(i);

    std::vector<const ModeHypothesis*> hyps_now;
    std::vector<const ModeObserverState*> states_now;
    std::vector<ResidualRecord> records;
    hyps_now.reserve(alive_idx.size());
    for (std::size_t i : alive_idx) {
        states_[i] = observer_step(std::move(states_[i]), hyps_[i], y, noise_w_, noise_v_,
                                   config_);
        ResidualRecord rec;
        if (states_[i].last_update_empty) {
            rec.mode_id = hyps_[i].mode_id;
            rec.r = Vec::Zero(hyps_[i].l);
            rec.half_width = Vec::Zero(hyps_[i].l);
            rec.violated = true;
        } else {
            rec = residual(hyps_[i], states_[i], y, noise_v_);
        }
        hyps_now.push_back(&hyps_[i]);
        states_now.push_back(&states_[i]);
        records.push_back(std::move(rec));
    }

    FusionResult result = fuse(hyps_now, states_now, records, step_);

    for (std::size_t k = 0; k < alive_idx.size(); ++k) {
        const int id = hyps_[alive_idx[k]].mode_id;
        const bool survived = std::find(result.surviving_modes.begin(),
                                        result.surviving_modes.end(),
                                        id) != result.surviving_modes.end();
        states_[alive_idx[k]].alive = survived;
    }
    surviving_ = result.surviving_modes;
    return result;
}

Vec SmspRunner::fused_mu_upper(const Vec& x) const {
    Vec out;
    for (std::size_t i = 0; i < hyps_.size(); ++i) {
        if (!states_[i].alive || states_[i].envelope.empty()) continue;
        const Vec v = eval_upper(states_[i].envelope, x);
        out = out.size() ? out.cwiseMax(v) : v;
    }
    if (!out.size()) throw EmptyDataset("fused_mu_upper: no surviving envelope");
    return out;
}

Vec SmspRunner::fused_mu_lower(const Vec& x) const {
    Vec out;
    for (std::size_t i = 0; i < hyps_.size(); ++i) {
        if (!states_[i].alive || states_[i].envelope.empty()) continue;
        const Vec v = eval_lower(states_[i].envelope, x);
        out = out.size() ? out.cwiseMin(v) : v;
    }
    if (!out.size()) throw EmptyDataset("fused_mu_lower: no surviving envelope");
    return out;
}

std::vector<FusionResult> run_smsp(std::vector<ModeHypothesis> hyps,
                                   const std::vector<Vec>& y_stream, IntervalVector init_z,
                                   const UpdateConfig& config, IntervalVector noise_w,
                                   IntervalVector noise_v,
                                   std::vector<PolicyEnvelope> init_envelopes) {
    SmspRunner runner(std::move(hyps), std::move(init_z), std::move(init_envelopes),
                      std::move(noise_w), std::move(noise_v), config);
    std::vector<FusionResult> out;
    out.reserve(y_stream.size());
    for (const Vec& y : y_stream) out.push_back(runner.step(y));
    return out;
}

PolicySample initial_policy_sample(const IntervalVector& init_z, int n, int p,
                                   const Vec& lipschitz) {
    const IntervalVector x0 = init_z.segment(0, n);
    const IntervalVector d0 = init_z.segment(n, p);
    PolicySample s;
    s.x_tilde = x0.mid();
    s.d_hi = d0.hi;
    s.d_lo = d0.lo;
    s.eps = 2.0 * lipschitz * x0.width().norm();
    return s;
}

}  // namespace modest
