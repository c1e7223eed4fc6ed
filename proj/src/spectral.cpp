#include "phaseop/spectral.hpp"

#include <charconv>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace phaseop {

namespace {

ComplexMatrix hermitian_part(const ComplexMatrix& g) {
    if (!g.is_square()) {
        throw DimensionMismatch("spectral matrix must be square");
    }
    const std::size_t n = g.rows();
    ComplexMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        out(i, i) = g(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const Complex v = 0.5 * (g(i, j) + std::conj(g(j, i)));
            out(i, j) = v;
            out(j, i) = std::conj(v);
        }
    }
    return out;
}

} // namespace

SpectralMatrix::SpectralMatrix(const ComplexMatrix& gamma, std::size_t snapshots_used)
    : gamma_(hermitian_part(gamma)), snapshots_used_(snapshots_used) {}

BlockPartition::BlockPartition(std::size_t n_sensors, std::size_t p_sources) : n_(n_sensors), p_(p_sources) {
    if (p_sources < 1) {
        throw ValidationError("p_sources must be at least 1");
    }
    if (n_sensors <= 4 * p_sources) {
        throw ValidationError("n_sensors must exceed 4*p_sources (got n_sensors=" + std::to_string(n_sensors) +
                              ", p_sources=" + std::to_string(p_sources) + ")");
    }
}

RowRange BlockPartition::range(std::size_t index) const {
    if (index < 1 || index > 5) {
        throw InvalidInput("block index must be in 1..5, got " + std::to_string(index));
    }
    const std::size_t begin = (index - 1) * p_;
    return {begin, index == 5 ? n_ - 4 * p_ : p_};
}

SpectralMatrix sample_covariance(const ComplexMatrix& snapshots) {
    const std::size_t n = snapshots.rows();
    const std::size_t k_count = snapshots.cols();
    ComplexMatrix g(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto xi = snapshots.row(i);
        for (std::size_t j = i; j < n; ++j) {
            const auto xj = snapshots.row(j);
            Complex acc{};
            for (std::size_t k = 0; k < k_count; ++k) {
                acc += xi[k] * std::conj(xj[k]);
            }
            g(i, j) = acc / static_cast<double>(k_count);
            g(j, i) = std::conj(g(i, j));
        }
    }
    return SpectralMatrix(g, k_count);
}

ComplexMatrix block(const SpectralMatrix& gamma, const BlockPartition& part, std::size_t i, std::size_t j,
                    BlockPolicy policy) {
    if (gamma.dim() != part.n_sensors()) {
        throw DimensionMismatch("partition built for N=" + std::to_string(part.n_sensors()) +
                                " but spectral matrix is " + std::to_string(gamma.dim()) + "x" +
                                std::to_string(gamma.dim()));
    }
    if (policy == BlockPolicy::off_diagonal && i == j) {
        throw SameIndexBlock("block (" + std::to_string(i) + "," + std::to_string(j) +
                             ") is on the noisy diagonal");
    }
    const RowRange ri = part.range(i);
    const RowRange rj = part.range(j);
    return gamma.gamma().block(ri.begin, rj.begin, ri.size, rj.size);
}

SpectralMatrix forward_backward_average(const SpectralMatrix& gamma) {
    const std::size_t n = gamma.dim();
    const auto& g = gamma.gamma();
    ComplexMatrix out(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            out(i, j) = 0.5 * (g(i, j) + std::conj(g(n - 1 - i, n - 1 - j)));
        }
    }
    return SpectralMatrix(out, gamma.snapshots_used());
}

void write_snapshots_csv(std::ostream& out, const ComplexMatrix& x, const std::string& comment) {
    if (!comment.empty()) {
        out << "# " << comment << '\n';
    }
    out << x.rows() << ',' << x.cols() << '\n';
    char buf[64];
    for (std::size_t i = 0; i < x.rows(); ++i) {
        for (std::size_t k = 0; k < x.cols(); ++k) {
            const Complex z = x(i, k);
            std::snprintf(buf, sizeof buf, "%s%.17g,%.17g", k == 0 ? "" : ",", z.real(), z.imag());
            out << buf;
        }
        out << '\n';
    }
}

namespace {

std::vector<double> parse_csv_numbers(const std::string& line, std::size_t line_no) {
    std::vector<double> values;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) {
        const auto first = field.find_first_not_of(" \t\r");
        const auto last = field.find_last_not_of(" \t\r");
        if (first == std::string::npos) {
            throw ParseError("empty CSV field", line_no);
        }
        const std::string trimmed = field.substr(first, last - first + 1);
        double v = 0.0;
        const auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), v);
        if (ec != std::errc{} || ptr != trimmed.data() + trimmed.size()) {
            throw ParseError("invalid number '" + trimmed + "'", line_no);
        }
        values.push_back(v);
    }
    return values;
}

} // namespace

ComplexMatrix read_snapshots_csv(std::istream& in) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t n = 0;
    std::size_t k_count = 0;
    bool have_header = false;
    std::vector<Complex> data;
    std::size_t rows_read = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#' || line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto values = parse_csv_numbers(line, line_no);
        if (!have_header) {
            if (values.size() != 2 || values[0] < 1 || values[1] < 1) {
                throw ParseError("header must be 'N,K' with positive integers", line_no);
            }
            n = static_cast<std::size_t>(values[0]);
            k_count = static_cast<std::size_t>(values[1]);
            data.reserve(n * k_count);
            have_header = true;
            continue;
        }
        if (rows_read == n) {
            throw ParseError("more than N data rows", line_no);
        }
        if (values.size() != 2 * k_count) {
            throw ParseError("expected " + std::to_string(2 * k_count) + " values, got " +
                                 std::to_string(values.size()),
                             line_no);
        }
        for (std::size_t k = 0; k < k_count; ++k) {
            data.emplace_back(values[2 * k], values[2 * k + 1]);
        }
        ++rows_read;
    }
    if (!have_header) {
        throw ParseError("missing 'N,K' header", 0);
    }
    if (rows_read != n) {
        throw ParseError("expected " + std::to_string(n) + " data rows, got " + std::to_string(rows_read), 0);
    }
    return ComplexMatrix(n, k_count, std::move(data));
}

} // namespace phaseop
