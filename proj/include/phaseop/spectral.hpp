#pragma once

#include <array>
#include <cstddef>
#include <iosfwd>
#include <string>

#include "phaseop/linalg.hpp"

namespace phaseop {

// Sample spectral matrix. Immutable; Hermitian by construction.
class SpectralMatrix {
public:
    // Symmetrizes (g + g^+)/2 on construction.
    SpectralMatrix(const ComplexMatrix& gamma, std::size_t snapshots_used);

    const ComplexMatrix& gamma() const noexcept { return gamma_; }
    std::size_t snapshots_used() const noexcept { return snapshots_used_; }
    std::size_t dim() const noexcept { return gamma_.rows(); }

private:
    ComplexMatrix gamma_;
    std::size_t snapshots_used_;
};

struct RowRange {
    std::size_t begin;
    std::size_t size;
};

// Five contiguous sensor groups: four of height P, then the remaining N - 4P.
class BlockPartition {
public:
    // Throws ValidationError unless N > 4P and P >= 1.
    BlockPartition(std::size_t n_sensors, std::size_t p_sources);

    std::size_t n_sensors() const noexcept { return n_; }
    std::size_t p_sources() const noexcept { return p_; }
    // 1-based block index.
    RowRange range(std::size_t index) const;
    std::size_t height(std::size_t index) const { return range(index).size; }

private:
    std::size_t n_;
    std::size_t p_;
};

enum class BlockPolicy {
    any,
    off_diagonal, // reject i == j (diagonal blocks carry the noise floor)
};

SpectralMatrix sample_covariance(const ComplexMatrix& snapshots);

// Gamma_ij over the partition's row ranges i x j (1-based).
ComplexMatrix block(const SpectralMatrix& gamma, const BlockPartition& part, std::size_t i, std::size_t j,
                    BlockPolicy policy = BlockPolicy::off_diagonal);

// (Gamma + J conj(Gamma) J) / 2 with J the exchange matrix.
SpectralMatrix forward_backward_average(const SpectralMatrix& gamma);

// Snapshot CSV: optional '#' comment lines, a header line "N,K", then N rows
// of 2K values interleaved re,im.
void write_snapshots_csv(std::ostream& out, const ComplexMatrix& x, const std::string& comment = {});
ComplexMatrix read_snapshots_csv(std::istream& in);

} // namespace phaseop
