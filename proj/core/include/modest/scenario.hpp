#pragma once

#include <array>
#include <map>
#include <string>

#include "modest/analysis.hpp"
#include "modest/config.hpp"
#include "modest/mode_estimation.hpp"

namespace modest {

// Deterministic 64-bit generator (splitmix64); the only randomness source of
// the scenario layer, so traces are reproducible bit-for-bit.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}
    std::uint64_t next_u64() {
        std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }
    Vec uniform_box(const IntervalVector& box) {
        Vec v(box.size());
        for (Eigen::Index i = 0; i < box.size(); ++i) v(i) = uniform(box.lo(i), box.hi(i));
        return v;
    }

  private:
    std::uint64_t state_;
};

struct TieLine {
    int from = 0, to = 0;  // 1-based area indices
    double gain = 1.0;
};

// Euler-discretized multi-area swing model with circuit-breaker attack modes.
// State layout: (theta_1, freq_1, ..., theta_A, freq_A).
struct PowerNetModel {
    int areas = 3;
    Vec inertia;               // m_i
    Vec damping;               // D_i
    std::vector<TieLine> lines;
    double dt = 0.01;
    IntervalVector noise_w;    // per-state process noise bounds
    IntervalVector noise_v;    // per-output measurement noise bounds
    std::vector<int> q5_cut_lines;  // line indices severed in the catch-all mode

    int n() const { return 2 * areas; }
    int p() const { return areas; }
    int l() const { return 2 * areas; }

    // attack policy d_i = theta_i sin(theta_i)
    Vec policy(const Vec& x) const;
    // line indices active under mode q (1 = all safe, 1+i = area i attacked,
    // 2 + areas = two or more breakers attacked)
    std::vector<int> active_lines(int mode) const;
    int mode_count() const { return areas + 2; }

    Vec dynamics(int mode, const Vec& x, const Vec& d, const Vec& w) const;
    Vec output(const Vec& x, const Vec& d, const Vec& v) const;
};

struct ScenarioConfig {
    PowerNetModel model;
    int true_mode = 1;
    long horizon = 3000;
    std::uint64_t seed = 1;
    IntervalVector initial_box;       // state part only
    long initial_policy_samples = 400;
    double warm_start_center = 0.0;     // theta grid center of the warm start
    double warm_start_halfwidth = 2.0;  // theta grid range of the warm start
    Vec lipschitz;                    // policy Lipschitz constants, per channel
    IntervalVector attack_bound;      // given global policy sandwich, per channel
    UpdateConfig observer;
    IntervalVector operating_box;     // state box used for global abstractions
    IntervalVector assumption_box;    // state box for the instability check
    std::string trace_name = "trace.csv";
    std::string summary_name = "summary.txt";
};

ScenarioConfig default_scenario_config();
ScenarioConfig load_scenario_config(const std::string& path);
ScenarioConfig scenario_config_from_ini(const IniFile& ini);

// The five hypotheses with their decompositions, global abstractions and
// closed-form local providers wired in.
std::vector<ModeHypothesis> build_powernet(const ScenarioConfig& cfg);

struct TruthTrace {
    std::vector<Vec> x;  // x[k], k = 0..horizon
    std::vector<Vec> d;  // d[k] = policy(x[k])
    std::vector<Vec> y;  // y[k-1] = measurement consumed at observer step k
};

// x0 is drawn uniformly from initial_box, then per step: w, then v.
TruthTrace simulate_truth(const PowerNetModel& model, int true_mode, long horizon,
                          std::uint64_t seed, const IntervalVector& initial_box);

// Exact policy samples on a theta-grid (eps = 0), one envelope per mode.
std::vector<PolicyEnvelope> warm_start_policy(const PowerNetModel& model,
                                              const ScenarioConfig& cfg);

// Initial augmented box: configured state box plus a padded policy range.
IntervalVector initial_augmented_box(const PowerNetModel& model, const IntervalVector& x_box);

struct RunSummary {
    int true_mode = 0;
    long horizon = 0;
    std::uint64_t seed = 0;
    std::map<int, long> elimination_step;  // mode -> step (absent = survived)
    double final_true_width_norm = 0.0;
    double max_true_violation = 0.0;  // framers vs truth, true mode; 0 expected
    bool all_modes_eliminated = false;
    long stopped_at = 0;
    double wall_seconds = 0.0;
    std::string trace_path;

    std::string serialize() const;
};

// Runs the full estimator and writes the CSV trace plus a summary file.
RunSummary run_and_trace(const ScenarioConfig& cfg, const std::string& out_dir);

// Offline certificates for the analyze command.
WidthModel build_width_model(const ScenarioConfig& cfg, const ModeHypothesis& hyp);
std::vector<ModeAnalysis> analyze_scenario(const ScenarioConfig& cfg);

}  // namespace modest
