#pragma once

#include <string>
#include <vector>

#include "modest/abstraction.hpp"
#include "modest/interval.hpp"

namespace modest {

// One entry of the augmented input-output data set: a framer midpoint, the
// attack-value interval estimated there, and the framer-width slack.
struct PolicySample {
    Vec x_tilde;
    Vec d_hi, d_lo;
    Vec eps;
};

// Set-membership over-approximation of an unknown Lipschitz policy.
// Snapshots are immutable values: push_sample consumes and returns.
struct PolicyEnvelope {
    std::vector<PolicySample> samples;
    Vec lipschitz;            // per output component
    std::size_t window = 0;   // 0 = keep everything
    std::size_t prune_cap = 5000;

    Eigen::Index out_dim() const { return lipschitz.size(); }
    bool empty() const { return samples.empty(); }
};

PolicyEnvelope push_sample(PolicyEnvelope env, PolicySample s);

// min_t (d_hi_t + L ||x - x~_t|| + eps_t) per component.
Vec eval_upper(const PolicyEnvelope& env, const Vec& x);
// max_t (d_lo_t - L ||x - x~_t|| - eps_t) per component.
Vec eval_lower(const PolicyEnvelope& env, const Vec& x);

// Closed-form interval hull of the envelope pair over a box (zero-slope
// abstraction): upper >= max eval_upper, lower <= min eval_lower on the box.
IntervalVector envelope_box_hull(const PolicyEnvelope& env, const IntervalVector& box);

// Parallel affine abstraction of (eval_lower, eval_upper) over the box,
// solved through the abstraction LP on a default sample grid.
AffineAbstraction envelope_abstraction(const PolicyEnvelope& env, const IntervalVector& box,
                                       const Vec& sigma, std::size_t sample_budget = 4096);

void save_envelope_csv(const PolicyEnvelope& env, const std::string& path);
PolicyEnvelope load_envelope_csv(const std::string& path, Vec lipschitz,
                                 std::size_t window = 0);

}  // namespace modest
