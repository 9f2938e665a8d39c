#include "modest/policy.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "modest/errors.hpp"

namespace modest {
namespace {

// True if s's cones lie inside t's cones everywhere (triangle inequality),
// so dropping t cannot change the envelope.
bool dominates(const PolicySample& s, const PolicySample& t, const Vec& lipschitz) {
    const double dist = (s.x_tilde - t.x_tilde).norm();
    for (Eigen::Index j = 0; j < lipschitz.size(); ++j) {
        const double slack = lipschitz(j) * dist;
        if (s.d_hi(j) + s.eps(j) + slack > t.d_hi(j) + t.eps(j)) return false;
        if (s.d_lo(j) - s.eps(j) - slack < t.d_lo(j) - t.eps(j)) return false;
    }
    return true;
}

void prune_dominated(PolicyEnvelope& env) {
    const std::size_t n = env.samples.size();
    std::vector<bool> keep(n, true);
    for (std::size_t t = 0; t < n; ++t) {
        for (std::size_t s = 0; s < n; ++s) {
            if (s == t || !keep[s]) continue;
            if (dominates(env.samples[s], env.samples[t], env.lipschitz)) {
                keep[t] = false;
                break;
            }
        }
    }
    std::vector<PolicySample> kept;
    kept.reserve(n);
    for (std::size_t t = 0; t < n; ++t)
        if (keep[t]) kept.push_back(std::move(env.samples[t]));
    env.samples = std::move(kept);
}

}  // namespace

PolicyEnvelope push_sample(PolicyEnvelope env, PolicySample s) {
    if (s.d_lo.size() != s.d_hi.size() || s.eps.size() != s.d_hi.size())
        throw DimensionError("push_sample: inconsistent sample");
    env.samples.push_back(std::move(s));
    if (env.window > 0 && env.samples.size() > env.window)
        env.samples.erase(env.samples.begin(),
                          env.samples.begin() + (env.samples.size() - env.window));
    if (env.prune_cap > 0 && env.samples.size() > env.prune_cap) {
        // pruning can only loosen the envelope, never break containment
        prune_dominated(env);
        if (env.samples.size() > env.prune_cap)
            env.prune_cap += env.prune_cap / 8;  // re-arm later, sweeps are quadratic
    }
    return env;
}

Vec eval_upper(const PolicyEnvelope& env, const Vec& x) {
    if (env.empty()) throw EmptyDataset("eval_upper: empty policy dataset");
    const Eigen::Index p = env.out_dim();
    Vec out = Vec::Constant(p, std::numeric_limits<double>::infinity());
    for (const PolicySample& s : env.samples) {
        const double dist = (x - s.x_tilde).norm();
        for (Eigen::Index j = 0; j < p; ++j)
            out(j) = std::min(out(j), s.d_hi(j) + env.lipschitz(j) * dist + s.eps(j));
    }
    return out;
}

Vec eval_lower(const PolicyEnvelope& env, const Vec& x) {
    if (env.empty()) throw EmptyDataset("eval_lower: empty policy dataset");
    const Eigen::Index p = env.out_dim();
    Vec out = Vec::Constant(p, -std::numeric_limits<double>::infinity());
    for (const PolicySample& s : env.samples) {
        const double dist = (x - s.x_tilde).norm();
        for (Eigen::Index j = 0; j < p; ++j)
            out(j) = std::max(out(j), s.d_lo(j) - env.lipschitz(j) * dist - s.eps(j));
    }
    return out;
}

IntervalVector envelope_box_hull(const PolicyEnvelope& env, const IntervalVector& box) {
    if (env.empty()) throw EmptyDataset("envelope_box_hull: empty policy dataset");
    const Eigen::Index p = env.out_dim();
    IntervalVector out;
    out.hi = Vec::Constant(p, std::numeric_limits<double>::infinity());
    out.lo = Vec::Constant(p, -std::numeric_limits<double>::infinity());
    for (const PolicySample& s : env.samples) {
        double sq = 0.0;
        for (Eigen::Index i = 0; i < box.size(); ++i) {
            const double d = std::max(std::abs(box.lo(i) - s.x_tilde(i)),
                                      std::abs(box.hi(i) - s.x_tilde(i)));
            sq += d * d;
        }
        const double maxdist = std::sqrt(sq);
        for (Eigen::Index j = 0; j < p; ++j) {
            out.hi(j) = std::min(out.hi(j), s.d_hi(j) + env.lipschitz(j) * maxdist + s.eps(j));
            out.lo(j) = std::max(out.lo(j), s.d_lo(j) - env.lipschitz(j) * maxdist - s.eps(j));
        }
    }
    return out;
}

AffineAbstraction envelope_abstraction(const PolicyEnvelope& env, const IntervalVector& box,
                                       const Vec& sigma, std::size_t sample_budget) {
    if (env.empty()) throw EmptyDataset("envelope_abstraction: empty policy dataset");
    const std::vector<Vec> samples = default_samples(box, sample_budget);
    const VectorFn lo_fn = [&env](const Vec& x) { return eval_lower(env, x); };
    const VectorFn hi_fn = [&env](const Vec& x) { return eval_upper(env, x); };
    return solve_parallel_abstraction(lo_fn, hi_fn, box, samples, sigma);
}

void save_envelope_csv(const PolicyEnvelope& env, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("save_envelope_csv: cannot open " + path);
    const Eigen::Index n = env.samples.empty() ? 0 : env.samples.front().x_tilde.size();
    const Eigen::Index p = env.out_dim();
    for (Eigen::Index i = 0; i < n; ++i) out << "x_" << (i + 1) << ",";
    for (Eigen::Index j = 0; j < p; ++j) out << "d_lo_" << (j + 1) << ",";
    for (Eigen::Index j = 0; j < p; ++j) out << "d_hi_" << (j + 1) << ",";
    for (Eigen::Index j = 0; j < p; ++j) out << "eps_" << (j + 1) << (j + 1 < p ? "," : "");
    out << "\n";
    char buf[32];
    const auto put = [&](double v, bool last) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        out << buf << (last ? "" : ",");
    };
    for (const PolicySample& s : env.samples) {
        for (Eigen::Index i = 0; i < n; ++i) put(s.x_tilde(i), false);
        for (Eigen::Index j = 0; j < p; ++j) put(s.d_lo(j), false);
        for (Eigen::Index j = 0; j < p; ++j) put(s.d_hi(j), false);
        for (Eigen::Index j = 0; j < p; ++j) put(s.eps(j), j + 1 == p);
        out << "\n";
    }
}

PolicyEnvelope load_envelope_csv(const std::string& path, Vec lipschitz, std::size_t window) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("load_envelope_csv: cannot open " + path);
    PolicyEnvelope env;
    env.lipschitz = std::move(lipschitz);
    env.window = window;
    const Eigen::Index p = env.out_dim();

    std::string line;
    if (!std::getline(in, line)) return env;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::vector<double> vals;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) vals.push_back(std::stod(cell));
        const Eigen::Index n = static_cast<Eigen::Index>(vals.size()) - 3 * p;
        if (n < 0) throw std::runtime_error("load_envelope_csv: malformed row");
        PolicySample s;
        s.x_tilde = Eigen::Map<Vec>(vals.data(), n);
        s.d_lo = Eigen::Map<Vec>(vals.data() + n, p);
        s.d_hi = Eigen::Map<Vec>(vals.data() + n + p, p);
        s.eps = Eigen::Map<Vec>(vals.data() + n + 2 * p, p);
        env.samples.push_back(std::move(s));
    }
    return env;
}

}  // namespace modest
