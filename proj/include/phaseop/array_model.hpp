#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "phaseop/linalg.hpp"
#include "phaseop/rng.hpp"

namespace phaseop {

inline constexpr double kSpeedOfLight = 299'792'458.0; // m/s

// Uniform linear array geometry.
class ArrayConfig {
public:
    ArrayConfig(std::size_t n_sensors, double spacing_m, double carrier_hz);

    // Geometry pinned by d/lambda. spacing_ratio() returns `ratio` exactly,
    // independent of rounding in the wavelength.
    static ArrayConfig from_spacing_ratio(std::size_t n_sensors, double ratio, double carrier_hz = 1e9);

    std::size_t n_sensors() const noexcept { return n_sensors_; }
    double spacing_m() const noexcept { return spacing_m_; }
    double carrier_hz() const noexcept { return carrier_hz_; }
    double wavelength_m() const noexcept { return kSpeedOfLight / carrier_hz_; }
    double spacing_ratio() const noexcept { return ratio_ ? *ratio_ : spacing_m_ / wavelength_m(); }

private:
    std::size_t n_sensors_;
    double spacing_m_;
    double carrier_hz_;
    std::optional<double> ratio_;
};

// Source directions (degrees, open interval (-90, 90), pairwise distinct)
// and linear powers.
class SourceSet {
public:
    explicit SourceSet(std::vector<double> angles_deg); // unit powers
    SourceSet(std::vector<double> angles_deg, std::vector<double> powers);

    std::size_t size() const noexcept { return angles_deg_.size(); }
    const std::vector<double>& angles_deg() const noexcept { return angles_deg_; }
    const std::vector<double>& powers() const noexcept { return powers_; }
    double mean_power() const noexcept;

private:
    std::vector<double> angles_deg_;
    std::vector<double> powers_;
};

struct Scenario {
    ArrayConfig array;
    SourceSet sources;
    std::size_t snapshots = 200;
    // +inf disables noise entirely.
    double snr_db = 5.0;
    std::uint64_t seed = 1;
    // Pairwise correlation coefficient of the source waveforms; 1 = coherent.
    double source_correlation = 0.0;

    bool noise_free() const noexcept;
    // sigma^2 = mean(source powers) * 10^(-snr_db / 10); 0 when noise_free().
    double noise_variance() const noexcept;
    // Throws InvalidInput on K = 0, bad correlation, or N <= P.
    void validate() const;
};

struct SnapshotData {
    ComplexMatrix x;       // N x K received snapshots
    ComplexMatrix signals; // P x K source waveforms
};

double path_difference(double theta_deg, const ArrayConfig& array);
ComplexMatrix steering_vector(double theta_deg, const ArrayConfig& array);
ComplexMatrix steering_matrix(const SourceSet& sources, const ArrayConfig& array);

// Draws signals then noise from a stream seeded by scenario.seed.
SnapshotData generate_snapshots(const Scenario& scenario);
SnapshotData generate_snapshots(const Scenario& scenario, RandomStream& rng);

// Rayleigh resolution lambda / ((N - 1) d), in degrees.
double rayleigh_hpbw_deg(const ArrayConfig& array);

} // namespace phaseop
