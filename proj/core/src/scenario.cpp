#include "modest/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

namespace modest {
namespace {

IntervalVector uniform_box(double lo, double hi, int dim) {
    return {Vec::Constant(dim, lo), Vec::Constant(dim, hi)};
}

std::vector<TieLine> parse_lines(const std::string& text, const std::vector<double>& gains) {
    std::vector<TieLine> lines;
    std::stringstream ss(text);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
        const std::size_t dash = cell.find('-');
        if (dash == std::string::npos)
            throw ConfigError("system.lines: expected 'i-l', got '" + cell + "'");
        TieLine ln;
        ln.from = static_cast<int>(parse_long(cell.substr(0, dash), "system.lines"));
        ln.to = static_cast<int>(parse_long(cell.substr(dash + 1), "system.lines"));
        lines.push_back(ln);
    }
    if (lines.empty()) throw ConfigError("system.lines: empty");
    if (gains.size() == 1) {
        for (TieLine& ln : lines) ln.gain = gains[0];
    } else if (gains.size() == lines.size()) {
        for (std::size_t i = 0; i < lines.size(); ++i) lines[i].gain = gains[i];
    } else {
        throw ConfigError("system.tie_gain: need 1 entry or one per line");
    }
    return lines;
}

const std::set<std::pair<std::string, std::string>>& known_keys() {
    static const std::set<std::pair<std::string, std::string>> keys = {
        {"system", "areas"},          {"system", "inertia"},
        {"system", "damping"},        {"system", "lines"},
        {"system", "tie_gain"},       {"system", "dt"},
        {"system", "process_noise"},  {"system", "measurement_noise"},
        {"system", "horizon"},        {"system", "seed"},
        {"system", "initial_box"},    {"system", "initial_box_freq"},
        {"system", "initial_theta"},  {"system", "initial_theta_halfwidth"},
        {"system", "operating_box"},  {"system", "assumption_box"},
        {"modes", "true_mode"},       {"modes", "q5_cut_lines"},
        {"observer", "max_update_iters"}, {"observer", "update_tol"},
        {"observer", "rowsupp_tol"},  {"observer", "kappa_mask"},
        {"observer", "refresh_g_abstraction"},
        {"policy", "lipschitz"},      {"policy", "initial_samples"},
        {"policy", "warm_start_center"}, {"policy", "warm_start_halfwidth"},
        {"policy", "attack_bound"},
        {"output", "trace"},          {"output", "summary"},
    };
    return keys;
}

char fmt_buf[40];
const char* fmt(double v) {
    std::snprintf(fmt_buf, sizeof fmt_buf, "%.17g", v);
    return fmt_buf;
}

}  // namespace

ScenarioConfig default_scenario_config() {
    ScenarioConfig cfg;
    PowerNetModel& m = cfg.model;
    m.areas = 3;
    m.inertia = (Vec(3) << 0.5, 0.95, 0.55).finished();
    m.damping = Vec::Constant(3, 1.2);
    m.lines = {{1, 2, 6.0}, {2, 3, 6.0}};
    m.dt = 0.01;
    m.noise_w = uniform_box(-0.1, 0.1, m.n());
    m.noise_v = uniform_box(-0.1, 0.1, m.l());
    m.q5_cut_lines = {0, 1};

    cfg.true_mode = 1;
    cfg.horizon = 3000;
    cfg.seed = 1;
    // edge areas lead, the heavy middle lags: the staggered start keeps the
    // tie-lines loaded while the framers are still warm-start tight
    cfg.initial_box = uniform_box(-0.2, 0.2, m.n());
    const double centers[3] = {2.6, 3.3, 2.6};
    for (int i = 0; i < m.areas; ++i) {
        cfg.initial_box.lo(2 * i) = centers[i] - 0.1;
        cfg.initial_box.hi(2 * i) = centers[i] + 0.1;
    }
    cfg.initial_policy_samples = 400;
    cfg.warm_start_center = 2.95;
    cfg.warm_start_halfwidth = 0.85;
    cfg.lipschitz = Vec::Constant(m.p(), 3.7);
    cfg.attack_bound = {Vec::Constant(m.p(), -2.8), Vec::Constant(m.p(), 2.1)};
    cfg.operating_box = uniform_box(-6.0, 6.0, m.n());
    cfg.assumption_box = uniform_box(0.2, 1.4, m.n());
    return cfg;
}

ScenarioConfig scenario_config_from_ini(const IniFile& ini) {
    for (const IniFile::Entry& e : ini.entries) {
        if (!known_keys().count({e.section, e.key}))
            throw ConfigError("unknown config key: [" + e.section + "] " + e.key);
    }

    ScenarioConfig cfg = default_scenario_config();
    PowerNetModel& m = cfg.model;

    if (ini.has("system", "areas")) {
        if (parse_long(ini.get("system", "areas", ""), "system.areas") != 3)
            throw ConfigError("system.areas: only 3 supported");
    }
    if (ini.has("system", "inertia")) {
        const auto v = parse_double_list(ini.get("system", "inertia", ""), "system.inertia");
        if (v.size() != 3) throw ConfigError("system.inertia: need 3 entries");
        m.inertia = Eigen::Map<const Vec>(v.data(), 3);
        if (m.inertia.minCoeff() <= 0.0) throw ConfigError("system.inertia: must be positive");
    }
    if (ini.has("system", "damping")) {
        const auto v = parse_double_list(ini.get("system", "damping", ""), "system.damping");
        if (v.size() != 3) throw ConfigError("system.damping: need 3 entries");
        m.damping = Eigen::Map<const Vec>(v.data(), 3);
    }
    {
        std::vector<double> gains = {1.0};
        if (ini.has("system", "tie_gain"))
            gains = parse_double_list(ini.get("system", "tie_gain", ""), "system.tie_gain");
        if (ini.has("system", "lines")) {
            m.lines = parse_lines(ini.get("system", "lines", ""), gains);
        } else if (ini.has("system", "tie_gain")) {
            m.lines = parse_lines("1-2,2-3", gains);
        }
        for (const TieLine& ln : m.lines) {
            if (ln.from < 1 || ln.from > 3 || ln.to < 1 || ln.to > 3 || ln.from == ln.to)
                throw ConfigError("system.lines: area index out of range");
        }
    }
    if (ini.has("system", "dt")) {
        m.dt = parse_double(ini.get("system", "dt", ""), "system.dt");
        if (m.dt <= 0.0) throw ConfigError("system.dt: must be positive");
    }
    if (ini.has("system", "process_noise")) {
        const double w = parse_double(ini.get("system", "process_noise", ""),
                                      "system.process_noise");
        if (w < 0.0) throw ConfigError("system.process_noise: must be nonnegative");
        m.noise_w = uniform_box(-w, w, m.n());
    }
    if (ini.has("system", "measurement_noise")) {
        const double v = parse_double(ini.get("system", "measurement_noise", ""),
                                      "system.measurement_noise");
        if (v < 0.0) throw ConfigError("system.measurement_noise: must be nonnegative");
        m.noise_v = uniform_box(-v, v, m.l());
    }
    if (ini.has("system", "horizon")) {
        cfg.horizon = parse_long(ini.get("system", "horizon", ""), "system.horizon");
        if (cfg.horizon < 1) throw ConfigError("system.horizon: must be >= 1");
    }
    if (ini.has("system", "seed"))
        cfg.seed = static_cast<std::uint64_t>(
            parse_long(ini.get("system", "seed", ""), "system.seed"));
    if (ini.has("system", "initial_box")) {
        const auto [lo, hi] = parse_range(ini.get("system", "initial_box", ""),
                                          "system.initial_box");
        cfg.initial_box = uniform_box(lo, hi, m.n());
    }
    if (ini.has("system", "initial_box_freq")) {
        const auto [lo, hi] = parse_range(ini.get("system", "initial_box_freq", ""),
                                          "system.initial_box_freq");
        for (int i = 0; i < m.areas; ++i) {
            cfg.initial_box.lo(2 * i + 1) = lo;
            cfg.initial_box.hi(2 * i + 1) = hi;
        }
    }
    if (ini.has("system", "initial_theta")) {
        const auto centers =
            parse_double_list(ini.get("system", "initial_theta", ""), "system.initial_theta");
        if (static_cast<int>(centers.size()) != m.areas)
            throw ConfigError("system.initial_theta: one center per area");
        double hw = 0.1;
        if (ini.has("system", "initial_theta_halfwidth"))
            hw = parse_double(ini.get("system", "initial_theta_halfwidth", ""),
                              "system.initial_theta_halfwidth");
        if (hw < 0.0) throw ConfigError("system.initial_theta_halfwidth: must be >= 0");
        for (int i = 0; i < m.areas; ++i) {
            cfg.initial_box.lo(2 * i) = centers[i] - hw;
            cfg.initial_box.hi(2 * i) = centers[i] + hw;
        }
    } else if (ini.has("system", "initial_theta_halfwidth")) {
        throw ConfigError("system.initial_theta_halfwidth requires system.initial_theta");
    }
    if (ini.has("system", "operating_box")) {
        const auto [lo, hi] = parse_range(ini.get("system", "operating_box", ""),
                                          "system.operating_box");
        cfg.operating_box = uniform_box(lo, hi, m.n());
    }
    if (ini.has("system", "assumption_box")) {
        const auto [lo, hi] = parse_range(ini.get("system", "assumption_box", ""),
                                          "system.assumption_box");
        cfg.assumption_box = uniform_box(lo, hi, m.n());
    }

    if (ini.has("modes", "true_mode")) {
        cfg.true_mode = static_cast<int>(
            parse_long(ini.get("modes", "true_mode", ""), "modes.true_mode"));
        if (cfg.true_mode < 1 || cfg.true_mode > m.mode_count())
            throw ConfigError("modes.true_mode: out of range 1..5");
    }
    if (ini.has("modes", "q5_cut_lines")) {
        const std::string text = ini.get("modes", "q5_cut_lines", "");
        m.q5_cut_lines.clear();
        if (text == "all") {
            for (int i = 0; i < static_cast<int>(m.lines.size()); ++i)
                m.q5_cut_lines.push_back(i);
        } else {
            const std::vector<TieLine> cuts = parse_lines(text, {1.0});
            for (const TieLine& cut : cuts) {
                bool found = false;
                for (int i = 0; i < static_cast<int>(m.lines.size()); ++i) {
                    if ((m.lines[i].from == cut.from && m.lines[i].to == cut.to) ||
                        (m.lines[i].from == cut.to && m.lines[i].to == cut.from)) {
                        m.q5_cut_lines.push_back(i);
                        found = true;
                    }
                }
                if (!found) throw ConfigError("modes.q5_cut_lines: no such line");
            }
        }
        if (m.q5_cut_lines.size() < 2)
            throw ConfigError("modes.q5_cut_lines: the catch-all mode cuts two or more lines");
    } else {
        m.q5_cut_lines.clear();
        for (int i = 0; i < static_cast<int>(m.lines.size()); ++i)
            m.q5_cut_lines.push_back(i);
    }

    if (ini.has("observer", "max_update_iters")) {
        cfg.observer.max_update_iters = static_cast<int>(parse_long(
            ini.get("observer", "max_update_iters", ""), "observer.max_update_iters"));
        if (cfg.observer.max_update_iters < 1)
            throw ConfigError("observer.max_update_iters: must be >= 1");
    }
    if (ini.has("observer", "update_tol")) {
        cfg.observer.update_tol =
            parse_double(ini.get("observer", "update_tol", ""), "observer.update_tol");
        if (cfg.observer.update_tol <= 0.0)
            throw ConfigError("observer.update_tol: must be positive");
    }
    if (ini.has("observer", "rowsupp_tol"))
        cfg.observer.rowsupp_tol =
            parse_double(ini.get("observer", "rowsupp_tol", ""), "observer.rowsupp_tol");
    if (ini.has("observer", "kappa_mask"))
        cfg.observer.kappa_mask =
            parse_bool(ini.get("observer", "kappa_mask", ""), "observer.kappa_mask");
    if (ini.has("observer", "refresh_g_abstraction"))
        cfg.observer.refresh_local_g_abs = parse_bool(
            ini.get("observer", "refresh_g_abstraction", ""), "observer.refresh_g_abstraction");

    if (ini.has("policy", "lipschitz")) {
        const auto v = parse_double_list(ini.get("policy", "lipschitz", ""), "policy.lipschitz");
        if (v.size() == 1) {
            cfg.lipschitz = Vec::Constant(m.p(), v[0]);
        } else if (static_cast<int>(v.size()) == m.p()) {
            cfg.lipschitz = Eigen::Map<const Vec>(v.data(), m.p());
        } else {
            throw ConfigError("policy.lipschitz: need 1 entry or one per channel");
        }
        if (cfg.lipschitz.minCoeff() < 0.0)
            throw ConfigError("policy.lipschitz: must be nonnegative");
    }
    if (ini.has("policy", "initial_samples")) {
        cfg.initial_policy_samples = parse_long(ini.get("policy", "initial_samples", ""),
                                                "policy.initial_samples");
        if (cfg.initial_policy_samples < 0)
            throw ConfigError("policy.initial_samples: must be >= 0");
    }
    if (ini.has("policy", "warm_start_center"))
        cfg.warm_start_center = parse_double(ini.get("policy", "warm_start_center", ""),
                                             "policy.warm_start_center");
    if (ini.has("policy", "warm_start_halfwidth")) {
        cfg.warm_start_halfwidth = parse_double(ini.get("policy", "warm_start_halfwidth", ""),
                                                "policy.warm_start_halfwidth");
        if (cfg.warm_start_halfwidth <= 0.0)
            throw ConfigError("policy.warm_start_halfwidth: must be positive");
    }
    if (ini.has("policy", "attack_bound")) {
        const auto [lo, hi] =
            parse_range(ini.get("policy", "attack_bound", ""), "policy.attack_bound");
        cfg.attack_bound = {Vec::Constant(m.p(), lo), Vec::Constant(m.p(), hi)};
    }

    cfg.trace_name = ini.get("output", "trace", cfg.trace_name);
    cfg.summary_name = ini.get("output", "summary", cfg.summary_name);
    return cfg;
}

ScenarioConfig load_scenario_config(const std::string& path) {
    return scenario_config_from_ini(parse_ini_file(path));
}

std::string RunSummary::serialize() const {
    std::ostringstream out;
    out << "true_mode: " << true_mode << "\n";
    out << "horizon: " << horizon << "\n";
    out << "seed: " << seed << "\n";
    out << "trace: " << trace_path << "\n";
    out << "all_modes_eliminated: " << (all_modes_eliminated ? "yes" : "no") << "\n";
    if (all_modes_eliminated) out << "stopped_at: " << stopped_at << "\n";
    for (const auto& [mode, step] : elimination_step)
        out << "mode_" << mode << "_eliminated_at: " << step << "\n";
    out << "final_true_width_norm: " << fmt(final_true_width_norm) << "\n";
    out << "max_true_framer_violation: " << fmt(max_true_violation) << "\n";
    out << "wall_seconds: " << wall_seconds << "\n";
    return out.str();
}

RunSummary run_and_trace(const ScenarioConfig& cfg, const std::string& out_dir) {
    namespace fs = std::filesystem;
    const auto t0 = std::chrono::steady_clock::now();

    const PowerNetModel& model = cfg.model;
    const int n = model.n(), p = model.p(), l = model.l();
    const int modes = model.mode_count();

    std::vector<ModeHypothesis> hyps = build_powernet(cfg);
    const TruthTrace truth =
        simulate_truth(model, cfg.true_mode, cfg.horizon, cfg.seed, cfg.initial_box);
    std::vector<PolicyEnvelope> envs = warm_start_policy(model, cfg);
    const IntervalVector init_z = initial_augmented_box(model, cfg.initial_box);

    SmspRunner runner(std::move(hyps), init_z, std::move(envs), model.noise_w, model.noise_v,
                      cfg.observer);

    fs::create_directories(out_dir);
    const std::string trace_path = (fs::path(out_dir) / cfg.trace_name).string();
    std::ofstream trace(trace_path);
    if (!trace) throw std::runtime_error("run_and_trace: cannot open " + trace_path);

    RunSummary summary;
    summary.true_mode = cfg.true_mode;
    summary.horizon = cfg.horizon;
    summary.seed = cfg.seed;
    summary.trace_path = trace_path;

    trace << "step";
    for (int i = 1; i <= n; ++i) trace << ",x" << i;
    for (int q = 1; q <= modes; ++q) {
        for (int i = 1; i <= n; ++i) trace << ",x" << i << "_lo_" << q << ",x" << i << "_hi_" << q;
        for (int j = 1; j <= p; ++j) trace << ",d" << j << "_lo_" << q << ",d" << j << "_hi_" << q;
        for (int c = 1; c <= l; ++c) trace << ",r" << c << "_" << q;
    }
    trace << ",alive_mask\n";

    const auto write_row = [&](long k, const FusionResult& res) {
        trace << k;
        for (int i = 0; i < n; ++i) trace << "," << fmt(truth.x[k](i));
        long mask = 0;
        for (int q = 1; q <= modes; ++q) {
            const auto pos =
                std::find(res.surviving_modes.begin(), res.surviving_modes.end(), q);
            const bool alive = pos != res.surviving_modes.end();
            if (alive) mask |= 1L << (q - 1);
            if (alive) {
                const std::size_t idx =
                    static_cast<std::size_t>(pos - res.surviving_modes.begin());
                const IntervalVector& xb = res.x_union[idx];
                const IntervalVector& db = res.d_union[idx];
                for (int i = 0; i < n; ++i)
                    trace << "," << fmt(xb.lo(i)) << "," << fmt(xb.hi(i));
                for (int j = 0; j < p; ++j)
                    trace << "," << fmt(db.lo(j)) << "," << fmt(db.hi(j));
            } else {
                for (int i = 0; i < 2 * (n + p); ++i) trace << ",";
            }
            const auto rec = std::find_if(res.residuals.begin(), res.residuals.end(),
                                          [&](const ResidualRecord& r) { return r.mode_id == q; });
            if (rec != res.residuals.end()) {
                for (int c = 0; c < l; ++c) trace << "," << fmt(rec->r(c));
            } else {
                for (int c = 0; c < l; ++c) trace << ",";
            }
        }
        trace << "," << mask << "\n";
    };

    std::set<int> alive_before;
    for (int q = 1; q <= modes; ++q) alive_before.insert(q);

    try {
        for (long k = 1; k <= cfg.horizon; ++k) {
            const FusionResult res = runner.step(truth.y[k - 1]);
            write_row(k, res);

            for (const Elimination& e : res.eliminated_this_step) {
                summary.elimination_step.emplace(e.mode_id, k);
                alive_before.erase(e.mode_id);
            }

            const auto pos = std::find(res.surviving_modes.begin(), res.surviving_modes.end(),
                                       cfg.true_mode);
            if (pos != res.surviving_modes.end()) {
                const std::size_t idx =
                    static_cast<std::size_t>(pos - res.surviving_modes.begin());
                Vec z_true(n + p);
                z_true << truth.x[k], truth.d[k];
                const IntervalVector zb = concat(res.x_union[idx], res.d_union[idx]);
                const double viol = std::max(
                    0.0, std::max((zb.lo - z_true).maxCoeff(), (z_true - zb.hi).maxCoeff()));
                summary.max_true_violation = std::max(summary.max_true_violation, viol);
                if (k == cfg.horizon) summary.final_true_width_norm = zb.width().norm();
            }
        }
    } catch (const AllModesEliminated& e) {
        summary.all_modes_eliminated = true;
        summary.stopped_at = e.step;
        trace.close();
        summary.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::ofstream sum((fs::path(out_dir) / cfg.summary_name).string());
        sum << summary.serialize();
        throw;
    }

    summary.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    trace.close();
    std::ofstream sum((fs::path(out_dir) / cfg.summary_name).string());
    if (!sum) throw std::runtime_error("run_and_trace: cannot open summary file");
    sum << summary.serialize();
    return summary;
}

}  // namespace modest
