// Command-line front end: scenario runs, offline certificates, and a small
// abstraction debugging utility.

#include <cmath>
#include <iostream>
#include <map>
#include <string>

#include <CLI11.hpp>

#include "modest/scenario.hpp"

namespace {

using modest::Vec;

int cmd_run(const std::string& config_path, const std::string& out_dir, long seed_override,
            bool has_seed) {
    modest::ScenarioConfig cfg = config_path.empty() ? modest::default_scenario_config()
                                                     : modest::load_scenario_config(config_path);
    if (has_seed) cfg.seed = static_cast<std::uint64_t>(seed_override);
    const modest::RunSummary summary = modest::run_and_trace(cfg, out_dir);
    std::cout << summary.serialize();
    return 0;
}

int cmd_analyze(const std::string& config_path) {
    modest::ScenarioConfig cfg = config_path.empty() ? modest::default_scenario_config()
                                                     : modest::load_scenario_config(config_path);
    const auto analyses = modest::analyze_scenario(cfg);
    const modest::DetectabilityReport report = modest::detectability_report(analyses);
    std::cout << report.serialize();
    return 0;
}

int cmd_abstraction(const std::string& name, const std::string& domain_text, int per_axis) {
    static const std::map<std::string, double (*)(double)> registry = {
        {"square", [](double x) { return x * x; }},
        {"cube", [](double x) { return x * x * x; }},
        {"sin", [](double x) { return std::sin(x); }},
        {"cos", [](double x) { return std::cos(x); }},
        {"exp", [](double x) { return std::exp(x); }},
        {"abs", [](double x) { return std::abs(x); }},
        {"tanh", [](double x) { return std::tanh(x); }},
    };
    const auto it = registry.find(name);
    if (it == registry.end()) {
        std::cerr << "unknown function '" << name << "'; available:";
        for (const auto& [k, fn] : registry) std::cerr << " " << k;
        std::cerr << "\n";
        return 2;
    }
    const auto [lo, hi] = modest::parse_range(domain_text, "--domain");
    const modest::IntervalVector domain{Vec::Constant(1, lo), Vec::Constant(1, hi)};
    const auto scalar = it->second;
    const modest::VectorFn fn = [scalar](const Vec& x) {
        return Vec::Constant(1, scalar(x(0)));
    };
    const auto samples = modest::grid_samples(domain, per_axis);
    const modest::AffineAbstraction abs =
        modest::solve_parallel_abstraction(fn, fn, domain, samples, Vec::Zero(1));
    std::cout << "function: " << name << "\n";
    std::cout << "domain: " << lo << ".." << hi << "\n";
    std::cout << "samples: " << samples.size() << "\n";
    std::cout << "slope: " << abs.A(0, 0) << "\n";
    std::cout << "e_lo: " << abs.e_lo(0) << "\n";
    std::cout << "e_hi: " << abs.e_hi(0) << "\n";
    std::cout << "theta: " << abs.theta << "\n";
    const auto check = modest::validate(abs, fn, fn, modest::grid_samples(domain, 4096));
    std::cout << "validated: " << (check.ok ? "yes" : "no") << "\n";
    std::cout << "worst_violation: " << check.worst_violation << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"set-valued state, attack and mode estimation for switched systems"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", fn_name, domain_text = "0..1";
    long seed = 0;
    int per_axis = 65;

    CLI::App* run = app.add_subcommand("run", "simulate a scenario and write the trace");
    run->add_option("--config", config_path, "scenario config file (INI)");
    run->add_option("--out", out_dir, "output directory");
    CLI::Option* seed_opt = run->add_option("--seed", seed, "override the config seed");

    CLI::App* analyze =
        app.add_subcommand("analyze", "stability and mode-detectability certificates");
    analyze->add_option("--config", config_path, "scenario config file (INI)");

    CLI::App* abstraction =
        app.add_subcommand("abstraction", "affine abstraction of a named 1-D function");
    abstraction->add_option("--function", fn_name, "function name")->required();
    abstraction->add_option("--domain", domain_text, "domain as LO..HI")->required();
    abstraction->add_option("--samples", per_axis, "sample count");

    try {
        app.parse(argc, argv);
        if (run->parsed()) return cmd_run(config_path, out_dir, seed, seed_opt->count() > 0);
        if (analyze->parsed()) return cmd_analyze(config_path);
        if (abstraction->parsed()) return cmd_abstraction(fn_name, domain_text, per_axis);
        return 2;
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 2;
    } catch (const modest::AllModesEliminated& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const modest::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid input: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
