#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "phaseop/angular_spectrum.hpp"
#include "phaseop/array_model.hpp"

namespace phaseop {

inline constexpr double kDefaultResolveThresholdDeg = 5.0;

struct PeakSet {
    std::vector<double> angles_deg; // ascending
    std::vector<double> values;     // linear heights at the refined peaks
    bool complete = true;           // false when fewer than p interior maxima existed
};

struct TrialError {
    std::string estimator_label;
    std::vector<double> per_source_error_deg;
    bool resolved = false;
};

struct RmseSummary {
    double rmse_deg;
    double resolution_rate; // resolved / total
    std::size_t resolved;
    std::size_t total;
};

// Strict interior local maxima; keeps the p highest and refines each with a
// 3-point parabola through the dB values.
PeakSet find_peaks(const AngularSpectrum& spec, std::size_t p);

// Sorted-order pairing of estimates with the true angles.
TrialError pair_and_error(const PeakSet& est, const SourceSet& truth, std::string label = {},
                          double resolve_threshold_deg = kDefaultResolveThresholdDeg);
TrialError pair_and_error(std::vector<double> est_deg, const SourceSet& truth, std::string label = {},
                          double resolve_threshold_deg = kDefaultResolveThresholdDeg);

// RMSE over resolved trials. Throws NoResolvedTrials when there are none.
RmseSummary rmse(const std::vector<TrialError>& trials);

} // namespace phaseop
