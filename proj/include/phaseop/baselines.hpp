#pragma once

#include <cstddef>
#include <vector>

#include "phaseop/angular_spectrum.hpp"
#include "phaseop/spectral.hpp"

namespace phaseop {

struct SubspacePair {
    ComplexMatrix u_s;               // N x P
    ComplexMatrix u_n;               // N x (N - P)
    std::vector<double> eigenvalues; // descending, all N
};

SubspacePair eigen_split(const SpectralMatrix& gamma, std::size_t p);

AngularSpectrum music_spectrum(const SubspacePair& pair, const SteeringGrid& steering);
AngularSpectrum music_spectrum(const SubspacePair& pair, const ArrayConfig& array, const std::vector<double>& grid_deg);

// Conventional (Bartlett) beamformer a^+ Gamma a / a^+ a, in dB.
AngularSpectrum bartlett_spectrum(const SpectralMatrix& gamma, const SteeringGrid& steering);
AngularSpectrum bartlett_spectrum(const SpectralMatrix& gamma, const ArrayConfig& array,
                                  const std::vector<double>& grid_deg);

// Least-squares ESPRIT on the maximally overlapping subarrays. Ascending angles
// in degrees. Throws InvalidShift for an eigenvalue that maps outside (-90, 90).
std::vector<double> esprit_angles(const SubspacePair& pair, const ArrayConfig& array, std::size_t p);

} // namespace phaseop
