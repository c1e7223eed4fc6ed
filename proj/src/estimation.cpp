#include "phaseop/estimation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace phaseop {

PeakSet find_peaks(const AngularSpectrum& spec, std::size_t p) {
    const auto& y = spec.values_db;
    const auto& grid = spec.grid_deg;
    if (grid.size() < 3 || y.size() != grid.size()) {
        throw InvalidInput("find_peaks needs a spectrum with at least 3 grid points");
    }
    if (p < 1) {
        throw InvalidInput("find_peaks needs p >= 1");
    }

    // dB is monotone in the linear value, so comparisons on either agree.
    std::vector<std::size_t> maxima;
    for (std::size_t g = 1; g + 1 < y.size(); ++g) {
        if (y[g] > y[g - 1] && y[g] > y[g + 1]) {
            maxima.push_back(g);
        }
    }

    PeakSet out;
    std::vector<std::size_t> chosen;
    if (maxima.size() >= p) {
        std::stable_sort(maxima.begin(), maxima.end(), [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
        chosen.assign(maxima.begin(), maxima.begin() + static_cast<std::ptrdiff_t>(p));
    } else {
        out.complete = false;
        std::vector<std::size_t> all(y.size());
        std::iota(all.begin(), all.end(), std::size_t{0});
        std::stable_sort(all.begin(), all.end(), [&](std::size_t a, std::size_t b) { return y[a] > y[b]; });
        chosen.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(std::min(p, all.size())));
    }
    std::sort(chosen.begin(), chosen.end());

    for (std::size_t g : chosen) {
        double angle = grid[g];
        double height_db = y[g];
        if (g > 0 && g + 1 < y.size() && y[g] > y[g - 1] && y[g] > y[g + 1]) {
            const double ym = y[g - 1];
            const double y0 = y[g];
            const double yp = y[g + 1];
            const double curvature = ym - 2.0 * y0 + yp;
            if (curvature < 0.0) {
                // |offset| <= 1/2 for a strict local maximum.
                const double offset = std::clamp(0.5 * (ym - yp) / curvature, -0.5, 0.5);
                const double step = offset >= 0.0 ? grid[g + 1] - grid[g] : grid[g] - grid[g - 1];
                angle = grid[g] + offset * step;
                height_db = y0 - 0.25 * (ym - yp) * offset;
            }
        }
        out.angles_deg.push_back(angle);
        out.values.push_back(std::pow(10.0, height_db / 10.0));
    }
    return out;
}

TrialError pair_and_error(std::vector<double> est_deg, const SourceSet& truth, std::string label,
                          double resolve_threshold_deg) {
    TrialError out{std::move(label), {}, false};
    if (est_deg.size() != truth.size()) {
        return out;
    }
    auto truth_sorted = truth.angles_deg();
    std::sort(truth_sorted.begin(), truth_sorted.end());
    std::sort(est_deg.begin(), est_deg.end());
    out.per_source_error_deg.resize(est_deg.size());
    bool within = true;
    for (std::size_t i = 0; i < est_deg.size(); ++i) {
        out.per_source_error_deg[i] = est_deg[i] - truth_sorted[i];
        within = within && std::abs(out.per_source_error_deg[i]) <= resolve_threshold_deg;
    }
    out.resolved = within;
    return out;
}

TrialError pair_and_error(const PeakSet& est, const SourceSet& truth, std::string label,
                          double resolve_threshold_deg) {
    auto result = pair_and_error(est.angles_deg, truth, std::move(label), resolve_threshold_deg);
    result.resolved = result.resolved && est.complete;
    return result;
}

RmseSummary rmse(const std::vector<TrialError>& trials) {
    double sum_sq = 0.0;
    std::size_t count = 0;
    std::size_t resolved = 0;
    for (const auto& t : trials) {
        if (!t.resolved) {
            continue;
        }
        ++resolved;
        for (double e : t.per_source_error_deg) {
            sum_sq += e * e;
            ++count;
        }
    }
    if (resolved == 0 || count == 0) {
        throw NoResolvedTrials("no resolved trials to aggregate");
    }
    return {std::sqrt(sum_sq / static_cast<double>(count)),
            static_cast<double>(resolved) / static_cast<double>(trials.size()), resolved, trials.size()};
}

} // namespace phaseop
