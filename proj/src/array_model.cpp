#include "phaseop/array_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

namespace phaseop {

namespace {

constexpr double kDegToRad = std::numbers::pi / 180.0;

void require_valid_angle(double theta_deg) {
    if (!std::isfinite(theta_deg) || theta_deg <= -90.0 || theta_deg >= 90.0) {
        throw InvalidInput("angle " + std::to_string(theta_deg) + " deg outside the open interval (-90, 90)");
    }
}

} // namespace

ArrayConfig::ArrayConfig(std::size_t n_sensors, double spacing_m, double carrier_hz)
    : n_sensors_(n_sensors), spacing_m_(spacing_m), carrier_hz_(carrier_hz) {
    if (n_sensors < 2) {
        throw InvalidInput("array needs at least 2 sensors");
    }
    if (!(spacing_m > 0.0) || !std::isfinite(spacing_m)) {
        throw InvalidInput("sensor spacing must be positive");
    }
    if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz)) {
        throw InvalidInput("carrier frequency must be positive");
    }
}

ArrayConfig ArrayConfig::from_spacing_ratio(std::size_t n_sensors, double ratio, double carrier_hz) {
    if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz)) {
        throw InvalidInput("carrier frequency must be positive");
    }
    ArrayConfig cfg(n_sensors, ratio * (kSpeedOfLight / carrier_hz), carrier_hz);
    cfg.ratio_ = ratio;
    return cfg;
}

SourceSet::SourceSet(std::vector<double> angles_deg)
    : SourceSet(angles_deg, std::vector<double>(angles_deg.size(), 1.0)) {}

SourceSet::SourceSet(std::vector<double> angles_deg, std::vector<double> powers)
    : angles_deg_(std::move(angles_deg)), powers_(std::move(powers)) {
    if (angles_deg_.empty()) {
        throw InvalidInput("at least one source is required");
    }
    if (angles_deg_.size() != powers_.size()) {
        throw InvalidInput("angles_deg and powers must have the same length");
    }
    for (double a : angles_deg_) {
        require_valid_angle(a);
    }
    for (double p : powers_) {
        if (!(p > 0.0) || !std::isfinite(p)) {
            throw InvalidInput("source powers must be positive");
        }
    }
    auto sorted = angles_deg_;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
        throw InvalidInput("source angles must be distinct");
    }
}

double SourceSet::mean_power() const noexcept {
    return std::accumulate(powers_.begin(), powers_.end(), 0.0) / static_cast<double>(powers_.size());
}

bool Scenario::noise_free() const noexcept { return std::isinf(snr_db) && snr_db > 0.0; }

double Scenario::noise_variance() const noexcept {
    if (noise_free()) {
        return 0.0;
    }
    return sources.mean_power() * std::pow(10.0, -snr_db / 10.0);
}

void Scenario::validate() const {
    if (snapshots < 1) {
        throw InvalidInput("snapshot count must be at least 1");
    }
    if (std::isnan(snr_db) || (std::isinf(snr_db) && snr_db < 0.0)) {
        throw InvalidInput("snr_db must be a number or +inf");
    }
    if (!(source_correlation >= 0.0 && source_correlation <= 1.0)) {
        throw InvalidInput("source_correlation must lie in [0, 1]");
    }
    if (array.n_sensors() <= sources.size()) {
        throw InvalidInput("the array needs more sensors than sources");
    }
}

double path_difference(double theta_deg, const ArrayConfig& array) {
    require_valid_angle(theta_deg);
    return 2.0 * std::numbers::pi * array.spacing_ratio() * std::sin(theta_deg * kDegToRad);
}

ComplexMatrix steering_vector(double theta_deg, const ArrayConfig& array) {
    const double mu = path_difference(theta_deg, array);
    ComplexMatrix a(array.n_sensors(), 1);
    a(0, 0) = 1.0;
    for (std::size_t n = 1; n < array.n_sensors(); ++n) {
        a(n, 0) = std::polar(1.0, -static_cast<double>(n) * mu);
    }
    return a;
}

ComplexMatrix steering_matrix(const SourceSet& sources, const ArrayConfig& array) {
    ComplexMatrix a(array.n_sensors(), sources.size());
    for (std::size_t p = 0; p < sources.size(); ++p) {
        const auto col = steering_vector(sources.angles_deg()[p], array);
        for (std::size_t n = 0; n < array.n_sensors(); ++n) {
            a(n, p) = col(n, 0);
        }
    }
    return a;
}

SnapshotData generate_snapshots(const Scenario& scenario) {
    RandomStream rng(scenario.seed);
    return generate_snapshots(scenario, rng);
}

SnapshotData generate_snapshots(const Scenario& scenario, RandomStream& rng) {
    scenario.validate();
    const std::size_t n = scenario.array.n_sensors();
    const std::size_t p_count = scenario.sources.size();
    const std::size_t k_count = scenario.snapshots;

    ComplexMatrix s(p_count, k_count);
    const double rho = scenario.source_correlation;
    std::vector<Complex> common;
    if (rho > 0.0) {
        common.resize(k_count);
        for (auto& z : common) {
            z = rng.complex_normal();
        }
    }
    const double w_common = std::sqrt(rho);
    const double w_own = std::sqrt(1.0 - rho);
    for (std::size_t p = 0; p < p_count; ++p) {
        const double amp = std::sqrt(scenario.sources.powers()[p]);
        for (std::size_t k = 0; k < k_count; ++k) {
            Complex z = w_own > 0.0 ? w_own * rng.complex_normal() : Complex{};
            if (rho > 0.0) {
                z += w_common * common[k];
            }
            s(p, k) = amp * z;
        }
    }

    ComplexMatrix x = matmul(steering_matrix(scenario.sources, scenario.array), s);
    if (!scenario.noise_free()) {
        const double sigma = std::sqrt(scenario.noise_variance());
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t k = 0; k < k_count; ++k) {
                x(i, k) += sigma * rng.complex_normal();
            }
        }
    }
    return {std::move(x), std::move(s)};
}

double rayleigh_hpbw_deg(const ArrayConfig& array) {
    const double aperture_wavelengths = static_cast<double>(array.n_sensors() - 1) * array.spacing_ratio();
    return (1.0 / aperture_wavelengths) / kDegToRad;
}

} // namespace phaseop
