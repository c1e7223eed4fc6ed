#pragma once

#include <cstddef>
#include <iosfwd>
#include <string>
#include <vector>

#include "phaseop/array_model.hpp"
#include "phaseop/linalg.hpp"

namespace phaseop {

struct AngularSpectrum {
    std::vector<double> grid_deg;  // strictly increasing, inside (-90, 90)
    std::vector<double> values_db; // 10 log10 of the linear spectrum
    std::string estimator_label;
    std::vector<double> peaks_deg; // filled by peak extraction, empty otherwise
};

// Symmetric grid k * step for every integer k with |k * step| < 90.
std::vector<double> make_angle_grid(double step_deg);

// Steering vectors for every grid angle, stored as the N x G matrix whose
// column g is a(grid[g]). Shared by all estimators evaluated on one grid.
class SteeringGrid {
public:
    SteeringGrid(const ArrayConfig& array, std::vector<double> grid_deg);

    const std::vector<double>& grid_deg() const noexcept { return grid_; }
    const ComplexMatrix& vectors() const noexcept { return vectors_; }
    std::size_t n_sensors() const noexcept { return vectors_.rows(); }

private:
    std::vector<double> grid_;
    ComplexMatrix vectors_;
};

// f(theta) = a^+ a / max(||op a||^2, 1e-16 N ||op||_F^2), in dB. Both the
// propagator spectra and MUSIC (op = U_n^+) have this shape.
AngularSpectrum annihilator_spectrum(const ComplexMatrix& op, const SteeringGrid& steering, std::string label);

// Relative denominator floor applied by annihilator_spectrum.
inline constexpr double kDenominatorFloor = 1e-16;

// CSV with header `angle_deg,<label>...`, one column per spectrum, 6 decimals.
// All spectra must share one grid.
void write_spectrum_csv(std::ostream& out, const std::vector<AngularSpectrum>& spectra,
                        const std::string& comment = {});

} // namespace phaseop
