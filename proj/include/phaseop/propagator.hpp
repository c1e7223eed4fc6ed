#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "phaseop/angular_spectrum.hpp"
#include "phaseop/linalg.hpp"
#include "phaseop/spectral.hpp"

namespace phaseop {

// How the auxiliary block index k is chosen when extracting Pi_ji.
enum class KMode {
    first,   // smallest admissible k
    average, // mean of Pi_ji over every admissible k
};

// Linear map with matrix * A_source = A_target on the noiseless model.
struct PiOperator {
    std::size_t target;              // j
    std::size_t source;              // i
    std::vector<std::size_t> k_used; // auxiliary block(s)
    ComplexMatrix matrix;            // h_j x h_i
};

// Auxiliary indices k in {1..4} \ {i, j}, ascending.
std::vector<std::size_t> admissible_k(std::size_t target, std::size_t source);

// Pi_ji = Gamma_jk inv(Gamma_ik), or Gamma_jk left_pinv(Gamma_5k) when the
// source block is the tall fifth block. Only off-diagonal blocks are read.
PiOperator pi_operator(const SpectralMatrix& gamma, const BlockPartition& part, std::size_t target,
                       std::size_t source, KMode mode = KMode::first);

// Same, with an explicit auxiliary block k.
PiOperator pi_operator_with_k(const SpectralMatrix& gamma, const BlockPartition& part, std::size_t target,
                              std::size_t source, std::size_t k);

// Operator row i (h_i x N): Pi_im at block column m != i, -4 I at column i.
ComplexMatrix psi_row(const SpectralMatrix& gamma, const BlockPartition& part, std::size_t i,
                      KMode mode = KMode::first);

struct PropagatorSet {
    std::size_t p_sources;
    std::size_t n_sensors;
    std::array<ComplexMatrix, 5> rows; // Psi_51 .. Psi_55
    ComplexMatrix psi;                 // rows stacked, N x N

    // 1-based.
    const ComplexMatrix& row(std::size_t i) const { return rows.at(i - 1); }
};

// Stacks five rows built on one partition. Throws DimensionMismatch when the
// row heights do not follow (P, P, P, P, N - 4P) or widths differ.
PropagatorSet assemble_psi(const std::array<ComplexMatrix, 5>& rows);

// psi_row for i = 1..5 followed by assemble_psi.
PropagatorSet build_propagators(const SpectralMatrix& gamma, std::size_t p_sources, KMode mode = KMode::first);

std::string psi_label(std::size_t i);

AngularSpectrum spectrum(const ComplexMatrix& row, const ArrayConfig& array, const std::vector<double>& grid_deg,
                         std::string label = "psi");
AngularSpectrum spectrum(const ComplexMatrix& row, const SteeringGrid& steering, std::string label = "psi");

struct RowOrthogonality {
    double relative_residual; // ||Psi_5i a||_F / ||a||_F
    double principal_angle;   // radians; pi/2 when orthogonal
};

std::array<RowOrthogonality, 5> orthogonality_report(const PropagatorSet& set, const ComplexMatrix& steering);

} // namespace phaseop
