#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "phaseop/array_model.hpp"
#include "phaseop/propagator.hpp"

namespace phaseop {

enum class Estimator { psi51, psi52, psi53, psi54, psi55, music, esprit, bartlett };

std::string_view estimator_label(Estimator e);
std::optional<Estimator> parse_estimator(std::string_view label);
const std::vector<Estimator>& all_estimators();
bool is_psi(Estimator e);
// 1..5 for psi51..psi55.
std::size_t psi_index(Estimator e);

// Raw key/value settings as read from a config file. Unvalidated; turn into
// an ExperimentConfig with build_config().
struct ConfigSettings {
    std::size_t n_sensors = 18;
    double spacing_ratio = 0.5;
    double carrier_hz = 1e9;
    std::vector<double> angles_deg;
    std::vector<double> powers; // empty = unit power for every source
    std::size_t snapshots = 200;
    double snr_db = 5.0;
    std::uint64_t seed = 1;
    double source_correlation = 0.0;
    double grid_step_deg = 0.1;
    std::size_t trials = 100;
    std::vector<double> snr_sweep_db = default_sweep();
    std::vector<Estimator> estimators = all_estimators();
    KMode pi_k_mode = KMode::first;
    bool forward_backward = false;
    double resolve_threshold_deg = 5.0;
    std::filesystem::path output_dir = "out";

    static std::vector<double> default_sweep(); // 0, 1, ..., 20

    // Applies one `key = value` setting. Throws ParseError on unknown keys or
    // malformed values; `line` is used for error messages.
    void set(std::string_view key, std::string_view value, std::size_t line = 0);
    // Parses "key=value" (the --set form).
    void apply_override(std::string_view assignment);
};

struct ExperimentConfig {
    Scenario scenario;
    double grid_step_deg;
    std::size_t trials;
    std::vector<double> snr_sweep_db;
    std::vector<Estimator> estimators; // canonical order, no duplicates
    KMode pi_k_mode;
    bool forward_backward;
    double resolve_threshold_deg;
    std::filesystem::path output_dir;

    // Stable textual form of every setting that affects results (output_dir excluded).
    std::string canonical_text() const;
    // 64-bit FNV-1a of canonical_text(), 16 hex digits.
    std::string hash() const;
};

// Reads settings from a flat `key = value` stream on top of `base`.
ConfigSettings parse_settings(std::istream& in, ConfigSettings base = {});

// Validates and converts. Throws ValidationError naming the violated rule.
ExperimentConfig build_config(const ConfigSettings& settings);

// parse_settings from a file, then overrides, then build_config.
ExperimentConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

// Human-readable key list with defaults, for --help.
std::string config_reference();

} // namespace phaseop
