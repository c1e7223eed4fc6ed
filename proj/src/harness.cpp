#include "phaseop/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <exception>
#include <fstream>
#include <ostream>
#include <thread>

#include "phaseop/baselines.hpp"
#include "phaseop/rng.hpp"
#include "phaseop/spectral.hpp"

#ifndef PHASEOP_VERSION
#define PHASEOP_VERSION "dev"
#endif

namespace phaseop {

void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body) {
    if (threads == 0) {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
    std::vector<std::exception_ptr> errors(count);
    if (threads <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            try {
                body(i);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        body(i);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                }
            });
        }
        for (auto& th : pool) {
            th.join();
        }
    }
    for (const auto& e : errors) {
        if (e) {
            std::rethrow_exception(e);
        }
    }
}

namespace {

std::string utc_timestamp() {
    const std::time_t now = std::time(nullptr);
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

std::ofstream open_output(const std::filesystem::path& path) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        throw Error("cannot write '" + path.string() + "'");
    }
    return out;
}

void write_metadata(const std::filesystem::path& path, const ExperimentConfig& cfg, const std::string& hash,
                    double wall_seconds, const std::string& timestamp,
                    const std::vector<std::pair<std::string, std::string>>& extra) {
    auto out = open_output(path);
    out << "tool = phaseop\n"
        << "version = " << PHASEOP_VERSION << '\n'
        << "config_hash = " << hash << '\n'
        << "seed = " << cfg.scenario.seed << '\n'
        << "timestamp = " << timestamp << '\n';
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3f", wall_seconds);
    out << "wall_time_s = " << buf << '\n';
    for (const auto& [k, v] : extra) {
        out << k << " = " << v << '\n';
    }
    out << "denominator_floor = 1e-16 * N * ||op||_F^2\n";
    out << "# resolved configuration\n";
    std::string canonical = cfg.canonical_text();
    out << canonical;
}

SpectralMatrix trial_covariance(const ExperimentConfig& cfg, const Scenario& scenario) {
    const auto data = generate_snapshots(scenario);
    auto gamma = sample_covariance(data.x);
    return cfg.forward_backward ? forward_backward_average(gamma) : gamma;
}

bool has_spectrum(Estimator e) { return e != Estimator::esprit; }

// Spectra of every requested spectral estimator for one covariance.
// Throws SingularBlock if a propagator row is requested and cannot be built.
std::vector<AngularSpectrum> trial_spectra(const ExperimentConfig& cfg, const SpectralMatrix& gamma,
                                           const SteeringGrid& steering) {
    const std::size_t p = cfg.scenario.sources.size();
    std::optional<PropagatorSet> psi;
    std::optional<SubspacePair> pair;
    std::vector<AngularSpectrum> out;
    for (Estimator e : cfg.estimators) {
        if (is_psi(e)) {
            if (!psi) {
                psi = build_propagators(gamma, p, cfg.pi_k_mode);
            }
            const std::size_t i = psi_index(e);
            out.push_back(spectrum(psi->row(i), steering, psi_label(i)));
        } else if (e == Estimator::music) {
            if (!pair) {
                pair = eigen_split(gamma, p);
            }
            out.push_back(music_spectrum(*pair, steering));
        } else if (e == Estimator::bartlett) {
            out.push_back(bartlett_spectrum(gamma, steering));
        }
    }
    return out;
}

std::string fmt_fixed6(double v) {
    char buf[48];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

} // namespace

SpectrumExperimentResult run_spectrum_experiment(const ExperimentConfig& cfg, const RunOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    const std::string timestamp = utc_timestamp();
    const SteeringGrid steering(cfg.scenario.array, make_angle_grid(cfg.grid_step_deg));

    std::vector<Estimator> spectral;
    for (Estimator e : cfg.estimators) {
        if (has_spectrum(e)) {
            spectral.push_back(e);
        }
    }
    if (spectral.empty()) {
        throw ValidationError("spectrum experiment needs at least one estimator with a spectrum");
    }

    // Per-trial linear spectra; nullopt marks a skipped trial.
    std::vector<std::optional<std::vector<std::vector<double>>>> per_trial(cfg.trials);
    parallel_for(cfg.trials, options.threads, [&](std::size_t t) {
        Scenario scenario = cfg.scenario;
        scenario.seed = derive_seed(cfg.scenario.seed, {t});
        const auto gamma = trial_covariance(cfg, scenario);
        try {
            std::vector<std::vector<double>> linear;
            for (const auto& s : trial_spectra(cfg, gamma, steering)) {
                std::vector<double> v(s.values_db.size());
                for (std::size_t g = 0; g < v.size(); ++g) {
                    v[g] = std::pow(10.0, s.values_db[g] / 10.0);
                }
                linear.push_back(std::move(v));
            }
            per_trial[t] = std::move(linear);
        } catch (const SingularBlock&) {
            per_trial[t].reset();
        }
    });

    SpectrumExperimentResult result;
    result.config_hash = cfg.hash();
    const std::size_t g_count = steering.grid_deg().size();
    std::vector<std::vector<double>> sums(spectral.size(), std::vector<double>(g_count, 0.0));
    for (const auto& trial : per_trial) {
        if (!trial) {
            ++result.trials_skipped;
            continue;
        }
        ++result.trials_run;
        for (std::size_t e = 0; e < spectral.size(); ++e) {
            for (std::size_t g = 0; g < g_count; ++g) {
                sums[e][g] += (*trial)[e][g];
            }
        }
    }
    if (result.trials_run == 0 ||
        static_cast<double>(result.trials_skipped) > kMaxSkippedFraction * static_cast<double>(cfg.trials)) {
        throw SingularBlock("spectrum experiment: " + std::to_string(result.trials_skipped) + " of " +
                            std::to_string(cfg.trials) +
                            " trials hit a singular covariance block (budget 10%); are the sources coherent?");
    }

    const std::size_t p = cfg.scenario.sources.size();
    for (std::size_t e = 0; e < spectral.size(); ++e) {
        AngularSpectrum s{steering.grid_deg(), std::vector<double>(g_count), std::string(estimator_label(spectral[e])),
                          {}};
        for (std::size_t g = 0; g < g_count; ++g) {
            s.values_db[g] = 10.0 * std::log10(sums[e][g] / static_cast<double>(result.trials_run));
        }
        s.peaks_deg = find_peaks(s, p).angles_deg;
        result.spectra.push_back(std::move(s));
    }

    if (options.write_files) {
        result.csv_path = cfg.output_dir / "spectrum.csv";
        {
            auto out = open_output(result.csv_path);
            write_spectrum_csv(out, result.spectra,
                               "config_hash=" + result.config_hash + " seed=" + std::to_string(cfg.scenario.seed));
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        write_metadata(cfg.output_dir / "spectrum.meta.txt", cfg, result.config_hash, wall, timestamp,
                       {{"experiment", "spectrum"},
                        {"threads", std::to_string(options.threads)},
                        {"trials_run", std::to_string(result.trials_run)},
                        {"trials_skipped", std::to_string(result.trials_skipped)}});
    }
    return result;
}

const EstimatorSeries& RmseReport::at(std::string_view label) const {
    for (const auto& s : series) {
        if (s.label == label) {
            return s;
        }
    }
    throw InvalidInput("report has no series '" + std::string(label) + "'");
}

namespace {

struct TrialOutcome {
    std::vector<TrialError> errors; // one per estimator, config order
    bool singular = false;
};

TrialOutcome evaluate_trial(const ExperimentConfig& cfg, const Scenario& scenario, const SteeringGrid& steering) {
    const auto gamma = trial_covariance(cfg, scenario);
    const auto& truth = scenario.sources;
    const std::size_t p = truth.size();
    const double threshold = cfg.resolve_threshold_deg;

    TrialOutcome outcome;
    std::optional<PropagatorSet> psi;
    bool psi_failed = false;
    std::optional<SubspacePair> pair;
    for (Estimator e : cfg.estimators) {
        const std::string label(estimator_label(e));
        if (is_psi(e)) {
            if (!psi && !psi_failed) {
                try {
                    psi = build_propagators(gamma, p, cfg.pi_k_mode);
                } catch (const SingularBlock&) {
                    psi_failed = true;
                    outcome.singular = true;
                }
            }
            if (psi_failed) {
                outcome.errors.push_back({label, {}, false});
                continue;
            }
            const auto s = spectrum(psi->row(psi_index(e)), steering, label);
            outcome.errors.push_back(pair_and_error(find_peaks(s, p), truth, label, threshold));
            continue;
        }
        if ((e == Estimator::music || e == Estimator::esprit) && !pair) {
            pair = eigen_split(gamma, p);
        }
        if (e == Estimator::music) {
            outcome.errors.push_back(pair_and_error(find_peaks(music_spectrum(*pair, steering), p), truth, label,
                                                    threshold));
        } else if (e == Estimator::bartlett) {
            outcome.errors.push_back(pair_and_error(find_peaks(bartlett_spectrum(gamma, steering), p), truth, label,
                                                    threshold));
        } else {
            try {
                outcome.errors.push_back(
                    pair_and_error(esprit_angles(*pair, scenario.array, p), truth, label, threshold));
            } catch (const InvalidShift&) {
                outcome.errors.push_back({label, {}, false});
            }
        }
    }
    return outcome;
}

} // namespace

RmseReport run_rmse_sweep(const ExperimentConfig& cfg, const RunOptions& options) {
    const auto started = std::chrono::steady_clock::now();
    const SteeringGrid steering(cfg.scenario.array, make_angle_grid(cfg.grid_step_deg));
    const std::size_t n_snr = cfg.snr_sweep_db.size();
    const std::size_t n_cells = n_snr * cfg.trials;

    std::vector<TrialOutcome> outcomes(n_cells);
    parallel_for(n_cells, options.threads, [&](std::size_t cell) {
        const std::size_t snr_index = cell / cfg.trials;
        const std::size_t trial = cell % cfg.trials;
        Scenario scenario = cfg.scenario;
        scenario.snr_db = cfg.snr_sweep_db[snr_index];
        scenario.seed = derive_seed(cfg.scenario.seed, {snr_index, trial});
        outcomes[cell] = evaluate_trial(cfg, scenario, steering);
    });

    RmseReport report;
    report.snr_db = cfg.snr_sweep_db;
    report.seed = cfg.scenario.seed;
    report.config_hash = cfg.hash();
    report.timestamp = utc_timestamp();
    for (const auto& o : outcomes) {
        report.singular_trials += o.singular ? 1 : 0;
    }
    for (std::size_t e = 0; e < cfg.estimators.size(); ++e) {
        EstimatorSeries series{std::string(estimator_label(cfg.estimators[e])), {}, {}};
        for (std::size_t s = 0; s < n_snr; ++s) {
            std::vector<TrialError> trials;
            trials.reserve(cfg.trials);
            for (std::size_t t = 0; t < cfg.trials; ++t) {
                trials.push_back(outcomes[s * cfg.trials + t].errors[e]);
            }
            try {
                const auto summary = rmse(trials);
                series.rmse_deg.emplace_back(summary.rmse_deg);
                series.resolve_rate.push_back(summary.resolution_rate);
            } catch (const NoResolvedTrials&) {
                series.rmse_deg.emplace_back(std::nullopt);
                series.resolve_rate.push_back(0.0);
            }
        }
        report.series.push_back(std::move(series));
    }

    if (options.write_files) {
        report.csv_path = cfg.output_dir / "rmse.csv";
        {
            auto out = open_output(report.csv_path);
            write_rmse_csv(out, report);
        }
        const double wall =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
        write_metadata(cfg.output_dir / "rmse.meta.txt", cfg, report.config_hash, wall, report.timestamp,
                       {{"experiment", "rmse"},
                        {"threads", std::to_string(options.threads)},
                        {"singular_trials", std::to_string(report.singular_trials)}});
    }
    return report;
}

void write_rmse_csv(std::ostream& out, const RmseReport& report) {
    out << "# config_hash=" << report.config_hash << " seed=" << report.seed << '\n';
    out << "snr_db";
    for (const auto& s : report.series) {
        out << ',' << s.label << "_rmse_deg," << s.label << "_resolve_rate";
    }
    out << '\n';
    for (std::size_t i = 0; i < report.snr_db.size(); ++i) {
        out << (std::isinf(report.snr_db[i]) ? std::string("inf") : fmt_fixed6(report.snr_db[i]));
        for (const auto& s : report.series) {
            out << ',' << (s.rmse_deg[i] ? fmt_fixed6(*s.rmse_deg[i]) : std::string()) << ','
                << fmt_fixed6(s.resolve_rate[i]);
        }
        out << '\n';
    }
}

std::filesystem::path run_simulation(const ExperimentConfig& cfg) {
    const auto started = std::chrono::steady_clock::now();
    const std::string timestamp = utc_timestamp();
    const auto data = generate_snapshots(cfg.scenario);
    const std::string hash = cfg.hash();
    const auto path = cfg.output_dir / "snapshots.csv";
    {
        auto out = open_output(path);
        write_snapshots_csv(out, data.x, "config_hash=" + hash + " seed=" + std::to_string(cfg.scenario.seed));
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    write_metadata(cfg.output_dir / "snapshots.meta.txt", cfg, hash, wall, timestamp, {{"experiment", "simulate"}});
    return path;
}

} // namespace phaseop
