#include "phaseop/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

namespace phaseop {

SubspacePair eigen_split(const SpectralMatrix& gamma, std::size_t p) {
    const std::size_t n = gamma.dim();
    if (p < 1 || p >= n) {
        throw InvalidInput("eigen_split needs 1 <= p < N, got p=" + std::to_string(p));
    }
    auto eig = hermitian_eig(gamma.gamma());
    return {eig.eigenvectors.block(0, 0, n, p), eig.eigenvectors.block(0, p, n, n - p), std::move(eig.eigenvalues)};
}

AngularSpectrum music_spectrum(const SubspacePair& pair, const SteeringGrid& steering) {
    // a^+ U_n U_n^+ a = ||U_n^+ a||^2
    return annihilator_spectrum(conj_transpose(pair.u_n), steering, "music");
}

AngularSpectrum music_spectrum(const SubspacePair& pair, const ArrayConfig& array, const std::vector<double>& grid_deg) {
    return music_spectrum(pair, SteeringGrid(array, grid_deg));
}

AngularSpectrum bartlett_spectrum(const SpectralMatrix& gamma, const SteeringGrid& steering) {
    if (gamma.dim() != steering.n_sensors()) {
        throw DimensionMismatch("spectral matrix and array size differ");
    }
    const auto& a = steering.vectors();
    const ComplexMatrix ga = matmul(gamma.gamma(), a);
    const std::size_t g_count = steering.grid_deg().size();
    const double n = static_cast<double>(steering.n_sensors());
    std::vector<double> num(g_count, 0.0);
    for (std::size_t r = 0; r < a.rows(); ++r) {
        const auto a_row = a.row(r);
        const auto ga_row = ga.row(r);
        for (std::size_t g = 0; g < g_count; ++g) {
            num[g] += (std::conj(a_row[g]) * ga_row[g]).real();
        }
    }
    AngularSpectrum out{steering.grid_deg(), std::vector<double>(g_count), "bartlett", {}};
    const double floor = kDenominatorFloor * frobenius_norm(gamma.gamma());
    for (std::size_t g = 0; g < g_count; ++g) {
        const double v = std::max(num[g] / n, floor);
        out.values_db[g] = v > 0.0 ? 10.0 * std::log10(v) : -300.0;
    }
    return out;
}

AngularSpectrum bartlett_spectrum(const SpectralMatrix& gamma, const ArrayConfig& array,
                                  const std::vector<double>& grid_deg) {
    return bartlett_spectrum(gamma, SteeringGrid(array, grid_deg));
}

std::vector<double> esprit_angles(const SubspacePair& pair, const ArrayConfig& array, std::size_t p) {
    const std::size_t n = pair.u_s.rows();
    if (p < 1 || p != pair.u_s.cols()) {
        throw InvalidInput("esprit: p must match the signal subspace dimension");
    }
    if (n < p + 1) {
        throw InvalidInput("esprit: need N >= p + 1");
    }
    const ComplexMatrix u1 = pair.u_s.block(0, 0, n - 1, p);
    const ComplexMatrix u2 = pair.u_s.block(1, 0, n - 1, p);
    const ComplexMatrix phi = matmul(left_pinv(u1), u2);
    const auto lambdas = general_eigenvalues(phi);

    const double scale = 1.0 / (2.0 * std::numbers::pi * array.spacing_ratio());
    std::vector<double> angles;
    angles.reserve(lambdas.size());
    for (const auto& lam : lambdas) {
        // Steering phase is e^{-j n mu}, so arg(lambda) = -mu.
        const double s = -std::arg(lam) * scale;
        if (std::abs(s) >= 1.0) {
            throw InvalidShift("esprit: eigenvalue phase " + std::to_string(std::arg(lam)) +
                               " rad maps outside the visible region");
        }
        angles.push_back(std::asin(s) * 180.0 / std::numbers::pi);
    }
    std::sort(angles.begin(), angles.end());
    return angles;
}

} // namespace phaseop
