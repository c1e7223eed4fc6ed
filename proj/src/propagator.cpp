#include "phaseop/propagator.hpp"

#include <string>

namespace phaseop {

namespace {

void require_block_index(std::size_t idx) {
    if (idx < 1 || idx > 5) {
        throw InvalidInput("block index must be in 1..5, got " + std::to_string(idx));
    }
}

} // namespace

std::vector<std::size_t> admissible_k(std::size_t target, std::size_t source) {
    require_block_index(target);
    require_block_index(source);
    if (target == source) {
        throw InvalidInput("Pi_ji needs distinct blocks, got i = j = " + std::to_string(target));
    }
    std::vector<std::size_t> ks;
    for (std::size_t k = 1; k <= 4; ++k) {
        if (k != target && k != source) {
            ks.push_back(k);
        }
    }
    return ks;
}

PiOperator pi_operator_with_k(const SpectralMatrix& gamma, const BlockPartition& part, std::size_t target,
                              std::size_t source, std::size_t k) {
    require_block_index(target);
    require_block_index(source);
    if (target == source) {
        throw InvalidInput("Pi_ji needs distinct blocks, got i = j = " + std::to_string(target));
    }
    if (k < 1 || k > 4 || k == target || k == source) {
        throw InvalidInput("auxiliary block k=" + std::to_string(k) + " is not admissible for Pi_" +
                           std::to_string(target) + std::to_string(source));
    }
    if (source == 5 && part.height(5) < part.p_sources()) {
        // A_5 has rank N-4P < P, so no map can send it back onto a P-row block.
        throw SingularBlock("Pi_j5 needs at least P rows in the fifth block (N >= 5P); got N-4P=" +
                            std::to_string(part.height(5)) + " with P=" + std::to_string(part.p_sources()));
    }
    const ComplexMatrix g_jk = block(gamma, part, target, k);
    const ComplexMatrix g_ik = block(gamma, part, source, k);
    // Square P x P block for i <= 4; tall (N-4P) x P for i = 5.
    const ComplexMatrix g_ik_inv = (source == 5) ? left_pinv(g_ik) : inverse(g_ik);
    return {target, source, {k}, matmul(g_jk, g_ik_inv)};
}

PiOperator pi_operator(const SpectralMatrix& gamma, const BlockPartition& part, std::size_t target,
                       std::size_t source, KMode mode) {
    require_block_index(target);
    require_block_index(source);
    if (target == source) {
        throw InvalidInput("Pi_ji needs distinct blocks, got i = j = " + std::to_string(target));
    }
    const auto ks = admissible_k(target, source);
    if (mode == KMode::first) {
        return pi_operator_with_k(gamma, part, target, source, ks.front());
    }
    PiOperator acc = pi_operator_with_k(gamma, part, target, source, ks.front());
    for (std::size_t idx = 1; idx < ks.size(); ++idx) {
        acc.matrix += pi_operator_with_k(gamma, part, target, source, ks[idx]).matrix;
    }
    acc.matrix *= 1.0 / static_cast<double>(ks.size());
    acc.k_used = ks;
    return acc;
}

ComplexMatrix psi_row(const SpectralMatrix& gamma, const BlockPartition& part, std::size_t i, KMode mode) {
    require_block_index(i);
    const std::size_t h_i = part.height(i);
    ComplexMatrix row(h_i, part.n_sensors());
    for (std::size_t m = 1; m <= 5; ++m) {
        const RowRange cols = part.range(m);
        if (m == i) {
            for (std::size_t d = 0; d < h_i; ++d) {
                row(d, cols.begin + d) = -4.0;
            }
        } else {
            row.set_block(0, cols.begin, pi_operator(gamma, part, i, m, mode).matrix);
        }
    }
    return row;
}

PropagatorSet assemble_psi(const std::array<ComplexMatrix, 5>& rows) {
    const std::size_t n = rows[0].cols();
    const std::size_t p = rows[0].rows();
    std::size_t total = 0;
    for (std::size_t i = 0; i < 5; ++i) {
        if (rows[i].cols() != n) {
            throw DimensionMismatch("psi rows have different widths");
        }
        if (i < 4 && rows[i].rows() != p) {
            throw DimensionMismatch("psi rows 1..4 must share height P");
        }
        total += rows[i].rows();
    }
    if (total != n || n <= 4 * p) {
        throw DimensionMismatch("psi row heights do not form an N x N operator with N > 4P");
    }
    ComplexMatrix psi(n, n);
    std::size_t offset = 0;
    for (const auto& r : rows) {
        psi.set_block(offset, 0, r);
        offset += r.rows();
    }
    return {p, n, rows, std::move(psi)};
}

PropagatorSet build_propagators(const SpectralMatrix& gamma, std::size_t p_sources, KMode mode) {
    const BlockPartition part(gamma.dim(), p_sources);
    return assemble_psi({psi_row(gamma, part, 1, mode), psi_row(gamma, part, 2, mode), psi_row(gamma, part, 3, mode),
                         psi_row(gamma, part, 4, mode), psi_row(gamma, part, 5, mode)});
}

std::string psi_label(std::size_t i) { return "psi5" + std::to_string(i); }

AngularSpectrum spectrum(const ComplexMatrix& row, const ArrayConfig& array, const std::vector<double>& grid_deg,
                         std::string label) {
    return spectrum(row, SteeringGrid(array, grid_deg), std::move(label));
}

AngularSpectrum spectrum(const ComplexMatrix& row, const SteeringGrid& steering, std::string label) {
    return annihilator_spectrum(row, steering, std::move(label));
}

std::array<RowOrthogonality, 5> orthogonality_report(const PropagatorSet& set, const ComplexMatrix& steering) {
    if (steering.rows() != set.n_sensors) {
        throw DimensionMismatch("steering matrix has " + std::to_string(steering.rows()) + " rows, expected " +
                                std::to_string(set.n_sensors));
    }
    const double a_norm = frobenius_norm(steering);
    std::array<RowOrthogonality, 5> report{};
    for (std::size_t i = 0; i < 5; ++i) {
        report[i].relative_residual = frobenius_norm(matmul(set.rows[i], steering)) / a_norm;
        report[i].principal_angle = principal_angle(set.rows[i], steering);
    }
    return report;
}

} // namespace phaseop
