#pragma once

#include <functional>
#include <optional>

#include "modest/mixed_monotone.hpp"
#include "modest/policy.hpp"

namespace modest {

// Local abstraction provider: given the current joint box, return a valid
// affine sandwich of the corresponding function over it.
using BoxAbstractionFn = std::function<AffineAbstraction(const IntervalVector&)>;
// Same for the learned policy envelope over the current state box.
using MuAbstractionFn =
    std::function<AffineAbstraction(const PolicyEnvelope&, const IntervalVector&)>;

// One hypothesis of the bank: dynamics/output maps with this mode's attack
// sparsity baked in, plus everything the interval machinery needs for them.
// f and g take the stacked inputs (x, d, w) and (x, d, v) respectively.
struct ModeHypothesis {
    int mode_id = 0;
    Mat actuator_pattern;  // columns select attacked actuator channels
    Mat sensor_pattern;    // columns select attacked sensor channels

    int n = 0, p = 0, l = 0, n_w = 0, n_v = 0;

    VectorFn f;
    VectorFn g;

    JacobianBounds f_jacobian_bounds;  // over stacked (x, d, w), operating domain
    JacobianBounds g_jacobian_bounds;  // over stacked (x, d, v)
    DecompositionSpec f_decomp;
    DecompositionSpec g_decomp;
    Vec g_lipschitz;

    AffineAbstraction global_f_abs;  // over the operating (x, d, w) box
    AffineAbstraction global_g_abs;  // over the operating (x, d, v) box

    // Local providers; when unset the global abstraction is used as-is.
    BoxAbstractionFn local_f_abs;
    BoxAbstractionFn local_g_abs;
    // Policy abstraction used by the input-estimation step; defaults to the
    // closed-form envelope hull when unset.
    MuAbstractionFn mu_abstraction;

    AffineAbstraction f_abstraction_on(const IntervalVector& box) const {
        return local_f_abs ? local_f_abs(box) : global_f_abs;
    }
    AffineAbstraction g_abstraction_on(const IntervalVector& box) const {
        return local_g_abs ? local_g_abs(box) : global_g_abs;
    }
};

struct UpdateConfig {
    int max_update_iters = 10;
    double update_tol = 1e-8;
    bool kappa_mask = true;      // infinity-mask semantics for kappa * rowsupp
    double kappa = 1e12;         // literal big-number fallback when kappa_mask = false
    double rowsupp_tol = 1e-9;
    double pinv_tol = 1e-12;
    bool refresh_local_g_abs = true;  // re-solve the g-abstraction each iteration
    bool record_trace = false;        // keep per-iteration framers (tests)
};

struct ModeObserverState {
    IntervalVector z;  // framers of the augmented state [x; d]
    PolicyEnvelope envelope;
    bool alive = true;
    bool last_update_empty = false;
    long step_index = 0;

    IntervalVector x_framers(int n) const { return z.segment(0, n); }
    IntervalVector d_framers(int n, int p) const { return z.segment(n, p); }
};

// State propagation: tightest of the decomposition bound and the local
// f-abstraction clamp over [z-framers x noise box].
IntervalVector propagate(const ModeObserverState& state, const ModeHypothesis& hyp,
                         const IntervalVector& noise_w, const UpdateConfig& config);

// Unknown input estimation through the sign-split policy abstraction slope,
// offsets included.
IntervalVector estimate_input(const IntervalVector& x_framers, const AffineAbstraction& mu_abs);

struct UpdateResult {
    IntervalVector z;
    bool empty = false;
    int iterations = 0;
    std::vector<IntervalVector> trace;  // filled when config.record_trace
};

UpdateResult measurement_update(const IntervalVector& z_prop, const Vec& y,
                                const ModeHypothesis& hyp, const IntervalVector& noise_v,
                                const UpdateConfig& config);

// One full observer step: propagate, abstract the learned policy, estimate
// the input, update against the measurement, then push the new data point.
ModeObserverState observer_step(ModeObserverState state, const ModeHypothesis& hyp, const Vec& y,
                                const IntervalVector& noise_w, const IntervalVector& noise_v,
                                const UpdateConfig& config);

// ---- provider factories ----

// Exact sandwich of an affine map: slope A with offsets [e_lo, e_hi].
BoxAbstractionFn affine_abstraction_provider(Mat A, Vec e_lo, Vec e_hi);

// LP-backed provider for an exactly known function (psi_lo = psi_hi = fn),
// sampling the box and widening by the Lipschitz dispersion margin.
BoxAbstractionFn lp_abstraction_provider(VectorFn fn, Vec output_lipschitz,
                                         std::size_t sample_budget = 4096,
                                         std::optional<AffineAbstraction> global = std::nullopt);

// Zero-slope policy abstraction from the closed-form envelope hull.
MuAbstractionFn envelope_hull_mu_provider();

// LP-backed policy abstraction (envelope_abstraction with dispersion sigma).
MuAbstractionFn lp_mu_provider(std::size_t sample_budget = 4096);

}  // namespace modest
