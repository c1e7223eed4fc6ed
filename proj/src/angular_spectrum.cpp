#include "phaseop/angular_spectrum.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>

namespace phaseop {

std::vector<double> make_angle_grid(double step_deg) {
    if (!(step_deg > 0.0) || step_deg > 5.0) {
        throw InvalidInput("grid step must lie in (0, 5] degrees");
    }
    const auto half = static_cast<long>(std::ceil(90.0 / step_deg)) - 1;
    std::vector<double> grid;
    grid.reserve(static_cast<std::size_t>(2 * half + 1));
    for (long k = -half; k <= half; ++k) {
        const double theta = static_cast<double>(k) * step_deg;
        if (std::abs(theta) < 90.0) {
            grid.push_back(theta);
        }
    }
    return grid;
}

SteeringGrid::SteeringGrid(const ArrayConfig& array, std::vector<double> grid_deg)
    : grid_(std::move(grid_deg)), vectors_(array.n_sensors(), grid_.empty() ? 1 : grid_.size()) {
    if (grid_.empty()) {
        throw InvalidInput("angle grid is empty");
    }
    for (std::size_t g = 0; g < grid_.size(); ++g) {
        if (g > 0 && !(grid_[g] > grid_[g - 1])) {
            throw InvalidInput("angle grid must be strictly increasing");
        }
        const auto a = steering_vector(grid_[g], array);
        for (std::size_t n = 0; n < array.n_sensors(); ++n) {
            vectors_(n, g) = a(n, 0);
        }
    }
}

AngularSpectrum annihilator_spectrum(const ComplexMatrix& op, const SteeringGrid& steering, std::string label) {
    if (op.cols() != steering.n_sensors()) {
        throw DimensionMismatch("operator has " + std::to_string(op.cols()) + " columns, array has " +
                                std::to_string(steering.n_sensors()) + " sensors");
    }
    const double n = static_cast<double>(steering.n_sensors());
    const double op_norm = frobenius_norm(op);
    const double floor = kDenominatorFloor * n * op_norm * op_norm;
    const ComplexMatrix projected = matmul(op, steering.vectors());

    const std::size_t g_count = steering.grid_deg().size();
    std::vector<double> den(g_count, 0.0);
    for (std::size_t r = 0; r < projected.rows(); ++r) {
        const auto row = projected.row(r);
        for (std::size_t g = 0; g < g_count; ++g) {
            den[g] += std::norm(row[g]);
        }
    }
    AngularSpectrum out{steering.grid_deg(), std::vector<double>(g_count), std::move(label), {}};
    for (std::size_t g = 0; g < g_count; ++g) {
        // Guard also covers an all-zero operator.
        const double d = std::max(den[g], floor);
        out.values_db[g] = d > 0.0 ? 10.0 * std::log10(n / d) : 10.0 * std::log10(n / kDenominatorFloor);
    }
    return out;
}

void write_spectrum_csv(std::ostream& out, const std::vector<AngularSpectrum>& spectra, const std::string& comment) {
    if (spectra.empty()) {
        throw InvalidInput("no spectra to write");
    }
    const auto& grid = spectra.front().grid_deg;
    for (const auto& s : spectra) {
        if (s.grid_deg != grid || s.values_db.size() != grid.size()) {
            throw DimensionMismatch("spectra must share one angle grid");
        }
    }
    if (!comment.empty()) {
        out << "# " << comment << '\n';
    }
    out << "angle_deg";
    for (const auto& s : spectra) {
        out << ',' << s.estimator_label;
    }
    out << '\n';
    char buf[64];
    for (std::size_t g = 0; g < grid.size(); ++g) {
        std::snprintf(buf, sizeof buf, "%.6f", grid[g]);
        out << buf;
        for (const auto& s : spectra) {
            std::snprintf(buf, sizeof buf, ",%.6f", s.values_db[g]);
            out << buf;
        }
        out << '\n';
    }
}

} // namespace phaseop
