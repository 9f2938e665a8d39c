#pragma once

#include <memory>
#include <vector>

#include "modest/observer.hpp"

namespace modest {

// Residual against the predicted output interval of one mode.
struct ResidualRecord {
    int mode_id = 0;
    Vec r;           // y - midpoint of [g_lo, g_hi]
    Vec half_width;  // (g_hi - g_lo) / 2
    bool violated = false;

    static constexpr double kMembershipSlack = 1e-9;
};

ResidualRecord residual(const ModeHypothesis& hyp, const ModeObserverState& state, const Vec& y,
                        const IntervalVector& noise_v);

enum class EliminationReason { ResidualViolation, EmptyIntersection };

struct Elimination {
    int mode_id = 0;
    EliminationReason reason = EliminationReason::ResidualViolation;
};

// Per-step output of the global fusion observer. The state/attack unions are
// kept as per-mode interval lists, aligned with surviving_modes.
struct FusionResult {
    long step = 0;
    std::vector<int> surviving_modes;
    std::vector<IntervalVector> x_union;
    std::vector<IntervalVector> d_union;
    std::vector<ResidualRecord> residuals;  // for every mode alive entering the step
    std::vector<Elimination> eliminated_this_step;
};

// Pure fusion of already-computed per-mode results; the runner below drives
// the per-step loop. Lists are aligned by position (one entry per mode that
// entered the step). Throws AllModesEliminated when nothing survives.
FusionResult fuse(const std::vector<const ModeHypothesis*>& hyps,
                  const std::vector<const ModeObserverState*>& states,
                  const std::vector<ResidualRecord>& records, long step);

// Algorithm state for simultaneous mode, state and attack-policy estimation:
// owns the bank of mode-matched observers and eliminates hypotheses whose
// residual leaves its membership interval (or whose update emptied).
class SmspRunner {
  public:
    SmspRunner(std::vector<ModeHypothesis> hyps, IntervalVector init_z,
               std::vector<PolicyEnvelope> init_envelopes, IntervalVector noise_w,
               IntervalVector noise_v, UpdateConfig config);

    FusionResult step(const Vec& y);

    long step_index() const { return step_; }
    const std::vector<int>& surviving() const { return surviving_; }
    const ModeObserverState& state(int mode_id) const;
    const ModeHypothesis& hypothesis(int mode_id) const;

    // Fused policy envelopes: pointwise max/min over survivors.
    Vec fused_mu_upper(const Vec& x) const;
    Vec fused_mu_lower(const Vec& x) const;

  private:
    std::vector<ModeHypothesis> hyps_;
    std::vector<ModeObserverState> states_;
    std::vector<int> surviving_;
    IntervalVector noise_w_, noise_v_;
    UpdateConfig config_;
    long step_ = 0;
};

// Convenience wrapper running the whole stream.
std::vector<FusionResult> run_smsp(std::vector<ModeHypothesis> hyps,
                                   const std::vector<Vec>& y_stream, IntervalVector init_z,
                                   const UpdateConfig& config, IntervalVector noise_w,
                                   IntervalVector noise_v,
                                   std::vector<PolicyEnvelope> init_envelopes);

// Data-set seed derived from the initial framers: midpoint, initial attack
// interval, framer-width slack.
PolicySample initial_policy_sample(const IntervalVector& init_z, int n, int p,
                                   const Vec& lipschitz);

}  // namespace modest
