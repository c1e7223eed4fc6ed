#include "phaseop/cli.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <numbers>
#include <ostream>
#include <sstream>

#include "phaseop/baselines.hpp"
#include "phaseop/estimation.hpp"
#include "phaseop/harness.hpp"
#include "phaseop/propagator.hpp"
#include "phaseop/spectral.hpp"

namespace phaseop {

ConfigSettings selftest_defaults() {
    ConfigSettings s;
    s.angles_deg = {10.0, 28.0, 49.0};
    s.snr_db = std::numeric_limits<double>::infinity();
    s.seed = 2013;
    return s;
}

std::vector<IdentityCheck> identity_battery(const ExperimentConfig& cfg) {
    Scenario scenario = cfg.scenario;
    scenario.snr_db = std::numeric_limits<double>::infinity();
    const std::size_t n = scenario.array.n_sensors();
    const std::size_t p = scenario.sources.size();

    const auto data = generate_snapshots(scenario);
    auto gamma = sample_covariance(data.x);
    if (cfg.forward_backward) {
        gamma = forward_backward_average(gamma);
    }
    const auto set = build_propagators(gamma, p, cfg.pi_k_mode);
    const ComplexMatrix a = steering_matrix(scenario.sources, scenario.array);

    std::vector<IdentityCheck> checks;
    auto add = [&](std::string name, double value, double threshold, bool pass) {
        checks.push_back({std::move(name), value, threshold, pass});
    };

    const double expected_trace = -4.0 * static_cast<double>(n);
    const Complex tr = trace(set.psi);
    const double trace_err = std::abs(tr - Complex(expected_trace));
    add("trace(Psi) = -4N", trace_err, 0.0, trace_err == 0.0);

    const auto sv = singular_values(set.psi);
    const std::size_t rank_target = n - p;
    std::size_t above = 0;
    for (double s : sv) {
        above += s > 1e-6 * sv.front() ? 1 : 0;
    }
    const double gap = sv[rank_target] > 0.0 ? sv[rank_target - 1] / sv[rank_target]
                                             : std::numeric_limits<double>::infinity();
    add("rank(Psi) = N - P (singular-value gap)", gap, 1e6, above == rank_target && gap >= 1e6);

    const double psi_gamma = frobenius_norm(matmul(set.psi, gamma.gamma())) / frobenius_norm(gamma.gamma());
    add("||Psi Gamma|| / ||Gamma||", psi_gamma, 1e-8, psi_gamma <= 1e-8);
    const double psi_x = frobenius_norm(matmul(set.psi, data.x)) / frobenius_norm(data.x);
    add("||Psi X|| / ||X||", psi_x, 1e-8, psi_x <= 1e-8);

    const auto ortho = orthogonality_report(set, a);
    double worst_angle = 0.0;
    for (const auto& o : ortho) {
        worst_angle = std::max(worst_angle, std::abs(o.principal_angle - std::numbers::pi / 2.0));
    }
    add("principal angle(Psi_5i, A) = pi/2", worst_angle, 1e-6, worst_angle <= 1e-6);

    const BlockPartition part(n, p);
    double worst_k = 0.0;
    for (std::size_t j = 1; j <= 5; ++j) {
        for (std::size_t i = 1; i <= 5; ++i) {
            if (i == j) {
                continue;
            }
            const auto ks = admissible_k(j, i);
            const auto ref = pi_operator_with_k(gamma, part, j, i, ks.front()).matrix;
            for (std::size_t idx = 1; idx < ks.size(); ++idx) {
                const auto other = pi_operator_with_k(gamma, part, j, i, ks[idx]).matrix;
                worst_k = std::max(worst_k, frobenius_norm(other - ref) / frobenius_norm(ref));
            }
        }
    }
    add("Pi_ji independent of k", worst_k, 1e-8, worst_k <= 1e-8);

    const SteeringGrid steering(scenario.array, make_angle_grid(cfg.grid_step_deg));
    double worst_peak = 0.0;
    bool complete = true;
    for (std::size_t i = 1; i <= 5; ++i) {
        const auto peaks = find_peaks(spectrum(set.row(i), steering, psi_label(i)), p);
        const auto err = pair_and_error(peaks, scenario.sources, psi_label(i), cfg.resolve_threshold_deg);
        complete = complete && err.resolved;
        for (double e : err.per_source_error_deg) {
            worst_peak = std::max(worst_peak, std::abs(e));
        }
        if (!err.resolved) {
            worst_peak = std::numeric_limits<double>::infinity();
        }
    }
    add("spectrum peaks at true angles (deg)", worst_peak, 0.05, complete && worst_peak <= 0.05);
    return checks;
}

namespace {

struct Invocation {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output_dir;
    unsigned threads = 1;
};

void add_common_options(CLI::App& sub, Invocation& inv, bool config_required) {
    auto* opt = sub.add_option("--config", inv.config_path, "Config file (key = value lines)");
    if (config_required) {
        opt->required();
    }
    sub.add_option("--set", inv.overrides, "Override a config key, KEY=VALUE (repeatable)");
    sub.add_option("--output", inv.output_dir, "Output directory (overrides output_dir)");
    sub.add_option("--threads", inv.threads, "Worker threads, 0 = auto")->default_val(1);
}

ExperimentConfig resolve_config(const Invocation& inv, ConfigSettings base) {
    if (const char* env = std::getenv("PHASEOP_OUTPUT_DIR"); env != nullptr && *env != '\0') {
        base.output_dir = env;
    }
    if (!inv.config_path.empty()) {
        std::ifstream in(inv.config_path);
        if (!in) {
            throw ParseError("cannot open config file '" + inv.config_path + "'", 0);
        }
        base = parse_settings(in, std::move(base));
    }
    for (const auto& o : inv.overrides) {
        base.apply_override(o);
    }
    if (!inv.output_dir.empty()) {
        base.output_dir = inv.output_dir;
    }
    return build_config(base);
}

std::string fmt(const char* spec, double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, spec, v);
    return buf;
}

void print_peak_table(std::ostream& out, const SpectrumExperimentResult& result) {
    out << "estimator   peaks_deg / heights_db\n";
    for (const auto& s : result.spectra) {
        const auto peaks = find_peaks(s, s.peaks_deg.size());
        out << s.estimator_label;
        for (std::size_t i = 0; i < peaks.angles_deg.size(); ++i) {
            out << "  " << fmt("%.3f", peaks.angles_deg[i]) << " / " << fmt("%.2f", 10.0 * std::log10(peaks.values[i]));
        }
        out << '\n';
    }
}

int cmd_spectrum(const Invocation& inv, std::ostream& out) {
    const auto cfg = resolve_config(inv, ConfigSettings{});
    const auto result = run_spectrum_experiment(cfg, {inv.threads, true});
    print_peak_table(out, result);
    out << "trials: " << result.trials_run << " run, " << result.trials_skipped << " skipped\n";
    out << "wrote " << result.csv_path.string() << '\n';
    return kExitOk;
}

int cmd_rmse(const Invocation& inv, std::ostream& out) {
    const auto cfg = resolve_config(inv, ConfigSettings{});
    const auto report = run_rmse_sweep(cfg, {inv.threads, true});
    out << "snr_db";
    for (const auto& s : report.series) {
        out << "  " << s.label;
    }
    out << '\n';
    for (std::size_t i = 0; i < report.snr_db.size(); ++i) {
        out << fmt("%.1f", report.snr_db[i]);
        for (const auto& s : report.series) {
            out << "  " << (s.rmse_deg[i] ? fmt("%.4f", *s.rmse_deg[i]) : std::string("-"));
        }
        out << '\n';
    }
    out << "wrote " << report.csv_path.string() << '\n';
    return kExitOk;
}

int cmd_simulate(const Invocation& inv, std::ostream& out) {
    const auto cfg = resolve_config(inv, ConfigSettings{});
    const auto path = run_simulation(cfg);
    out << "wrote " << path.string() << '\n';
    return kExitOk;
}

int cmd_selftest(const Invocation& inv, std::ostream& out) {
    auto settings = selftest_defaults();
    const auto cfg = resolve_config(inv, settings);
    out << "selftest: N=" << cfg.scenario.array.n_sensors() << " P=" << cfg.scenario.sources.size()
        << " K=" << cfg.scenario.snapshots << " noiseless"
        << (cfg.forward_backward ? ", forward-backward averaged" : "") << '\n';
    const auto checks = identity_battery(cfg);
    bool all = true;
    for (const auto& c : checks) {
        out << (c.pass ? "PASS  " : "FAIL  ") << c.name << "  value=" << fmt("%.3e", c.value)
            << " threshold=" << fmt("%.1e", c.threshold) << '\n';
        all = all && c.pass;
    }
    return all ? kExitOk : kExitRuntime;
}

} // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Fifth-order propagator direction-of-arrival estimation for uniform linear arrays"};
    app.footer(config_reference());
    app.require_subcommand(1);

    Invocation inv;
    auto* spectrum_cmd = app.add_subcommand("spectrum", "Monte-Carlo averaged angular spectra (CSV + peak table)");
    auto* rmse_cmd = app.add_subcommand("rmse", "RMSE against SNR sweep (CSV)");
    auto* simulate_cmd = app.add_subcommand("simulate", "Write one synthetic snapshot matrix as CSV");
    auto* selftest_cmd = app.add_subcommand("selftest", "Noiseless structural identity battery");
    add_common_options(*spectrum_cmd, inv, true);
    add_common_options(*rmse_cmd, inv, true);
    add_common_options(*simulate_cmd, inv, true);
    add_common_options(*selftest_cmd, inv, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (spectrum_cmd->parsed()) {
            return cmd_spectrum(inv, out);
        }
        if (rmse_cmd->parsed()) {
            return cmd_rmse(inv, out);
        }
        if (simulate_cmd->parsed()) {
            return cmd_simulate(inv, out);
        }
        return cmd_selftest(inv, out);
    } catch (const ParseError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const ValidationError& e) {
        err << "config error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const SingularBlock& e) {
        err << "SingularBlock: " << e.what() << '\n';
        return kExitRuntime;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}

} // namespace phaseop
