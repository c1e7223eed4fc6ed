#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "phaseop/angular_spectrum.hpp"
#include "phaseop/config.hpp"
#include "phaseop/estimation.hpp"

namespace phaseop {

struct RunOptions {
    unsigned threads = 1; // 0 = hardware concurrency
    bool write_files = true;
};

// Runs body(i) for i in [0, count) on `threads` workers. Results must be
// written to per-index slots; the first exception by index is rethrown.
void parallel_for(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& body);

// Skipped-trial budget for spectrum experiments (fraction of trials).
inline constexpr double kMaxSkippedFraction = 0.10;

struct SpectrumExperimentResult {
    std::vector<AngularSpectrum> spectra; // trial-averaged (linear), then dB; peaks filled
    std::size_t trials_run = 0;
    std::size_t trials_skipped = 0;
    std::string config_hash;
    std::filesystem::path csv_path;
};

// Averages the spectra of every requested spectral estimator (ESPRIT has no
// spectrum and is ignored) over cfg.trials runs at cfg.scenario.snr_db.
// Writes spectrum.csv and spectrum.meta.txt into cfg.output_dir.
SpectrumExperimentResult run_spectrum_experiment(const ExperimentConfig& cfg, const RunOptions& options = {});

struct EstimatorSeries {
    std::string label;
    std::vector<std::optional<double>> rmse_deg; // nullopt = no resolved trial
    std::vector<double> resolve_rate;
};

struct RmseReport {
    std::vector<double> snr_db;
    std::vector<EstimatorSeries> series;
    std::uint64_t seed = 0;
    std::string config_hash;
    std::string timestamp;
    std::size_t singular_trials = 0; // trials where the propagator could not be built
    std::filesystem::path csv_path;

    const EstimatorSeries& at(std::string_view label) const;
};

// L independent trials per SNR point, trial seeds derived from
// (seed, snr_index, trial). Writes rmse.csv and rmse.meta.txt.
RmseReport run_rmse_sweep(const ExperimentConfig& cfg, const RunOptions& options = {});

void write_rmse_csv(std::ostream& out, const RmseReport& report);

// Generates one snapshot matrix for cfg.scenario and writes snapshots.csv.
std::filesystem::path run_simulation(const ExperimentConfig& cfg);

} // namespace phaseop
