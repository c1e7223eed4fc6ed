#include "phaseop/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <utility>

namespace phaseop {

namespace {

std::string shape(const ComplexMatrix& a) {
    return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_nonempty(std::size_t rows, std::size_t cols) {
    if (rows == 0 || cols == 0) {
        throw DimensionMismatch("matrix dimensions must be at least 1x1");
    }
}

void require_square(const ComplexMatrix& a, const char* op) {
    if (!a.is_square()) {
        throw DimensionMismatch(std::string(op) + ": expected square matrix, got " + shape(a));
    }
}

void require_same_shape(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) {
        throw DimensionMismatch("shape mismatch: " + shape(a) + " vs " + shape(b));
    }
}

} // namespace

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_((require_nonempty(rows, cols), rows * cols)) {}

ComplexMatrix::ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
    require_nonempty(rows, cols);
    if (data_.size() != rows * cols) {
        throw DimensionMismatch("data length " + std::to_string(data_.size()) + " does not match " +
                                std::to_string(rows) + "x" + std::to_string(cols));
    }
    if (!all_finite()) {
        throw InvalidInput("matrix data contains NaN or Inf");
    }
}

ComplexMatrix::ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
    require_nonempty(rows_, cols_);
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
        if (r.size() != cols_) {
            throw DimensionMismatch("ragged initializer list");
        }
        data_.insert(data_.end(), r.begin(), r.end());
    }
    if (!all_finite()) {
        throw InvalidInput("matrix data contains NaN or Inf");
    }
}

ComplexMatrix ComplexMatrix::identity(std::size_t n) {
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = 1.0;
    }
    return m;
}

ComplexMatrix ComplexMatrix::column(std::span<const Complex> values) {
    return ComplexMatrix(values.size(), 1, std::vector<Complex>(values.begin(), values.end()));
}

ComplexMatrix ComplexMatrix::block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const {
    if (r0 + nr > rows_ || c0 + nc > cols_) {
        throw DimensionMismatch("block out of range of " + shape(*this));
    }
    ComplexMatrix out(nr, nc);
    for (std::size_t r = 0; r < nr; ++r) {
        std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>((r0 + r) * cols_ + c0), nc, out.row(r).begin());
    }
    return out;
}

void ComplexMatrix::set_block(std::size_t r0, std::size_t c0, const ComplexMatrix& src) {
    if (r0 + src.rows() > rows_ || c0 + src.cols() > cols_) {
        throw DimensionMismatch("set_block: " + shape(src) + " does not fit in " + shape(*this));
    }
    for (std::size_t r = 0; r < src.rows(); ++r) {
        std::copy(src.row(r).begin(), src.row(r).end(), row(r0 + r).begin() + static_cast<std::ptrdiff_t>(c0));
    }
}

bool ComplexMatrix::all_finite() const noexcept {
    return std::all_of(data_.begin(), data_.end(),
                       [](const Complex& z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); });
}

ComplexMatrix& ComplexMatrix::operator+=(const ComplexMatrix& rhs) {
    require_same_shape(*this, rhs);
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] += rhs.data_[i];
    }
    return *this;
}

ComplexMatrix& ComplexMatrix::operator-=(const ComplexMatrix& rhs) {
    require_same_shape(*this, rhs);
    for (std::size_t i = 0; i < data_.size(); ++i) {
        data_[i] -= rhs.data_[i];
    }
    return *this;
}

ComplexMatrix& ComplexMatrix::operator*=(Complex s) noexcept {
    for (auto& z : data_) {
        z *= s;
    }
    return *this;
}

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b) { return a += b; }
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b) { return a -= b; }
ComplexMatrix operator*(Complex s, ComplexMatrix a) { return a *= s; }
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b) { return matmul(a, b); }

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b) {
    if (a.cols() != b.rows()) {
        throw DimensionMismatch("matmul: " + shape(a) + " times " + shape(b));
    }
    ComplexMatrix out(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        auto out_row = out.row(i);
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const Complex aik = a(i, k);
            if (aik == Complex{}) {
                continue;
            }
            auto b_row = b.row(k);
            for (std::size_t j = 0; j < b.cols(); ++j) {
                out_row[j] += aik * b_row[j];
            }
        }
    }
    return out;
}

ComplexMatrix conj_transpose(const ComplexMatrix& a) {
    ComplexMatrix out(a.cols(), a.rows());
    for (std::size_t i = 0; i < a.rows(); ++i) {
        for (std::size_t j = 0; j < a.cols(); ++j) {
            out(j, i) = std::conj(a(i, j));
        }
    }
    return out;
}

Complex trace(const ComplexMatrix& a) {
    require_square(a, "trace");
    Complex t{};
    for (std::size_t i = 0; i < a.rows(); ++i) {
        t += a(i, i);
    }
    return t;
}

double frobenius_norm(const ComplexMatrix& a) {
    // Scaled accumulation avoids overflow for large entries.
    double scale = 0.0;
    double ssq = 1.0;
    for (const auto& z : a.data()) {
        for (double v : {z.real(), z.imag()}) {
            const double av = std::abs(v);
            if (av == 0.0) {
                continue;
            }
            if (scale < av) {
                ssq = 1.0 + ssq * (scale / av) * (scale / av);
                scale = av;
            } else {
                ssq += (av / scale) * (av / scale);
            }
        }
    }
    return scale * std::sqrt(ssq);
}

// ---------------------------------------------------------------------------
// LU / inverse

namespace {

struct LuFactors {
    ComplexMatrix lu;
    std::vector<std::size_t> perm; // row i of lu came from row perm[i] of the input
};

LuFactors lu_factor(const ComplexMatrix& a) {
    const std::size_t n = a.rows();
    LuFactors f{a, std::vector<std::size_t>(n)};
    std::iota(f.perm.begin(), f.perm.end(), std::size_t{0});
    auto& lu = f.lu;

    double max_pivot = 0.0;
    double min_pivot = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(lu(k, k));
        for (std::size_t r = k + 1; r < n; ++r) {
            const double v = std::abs(lu(r, k));
            if (v > best) {
                best = v;
                piv = r;
            }
        }
        if (piv != k) {
            std::swap_ranges(lu.row(k).begin(), lu.row(k).end(), lu.row(piv).begin());
            std::swap(f.perm[k], f.perm[piv]);
        }
        max_pivot = std::max(max_pivot, best);
        min_pivot = std::min(min_pivot, best);
        if (best == 0.0) {
            throw SingularBlock("singular matrix: zero pivot at column " + std::to_string(k));
        }
        const Complex pivot = lu(k, k);
        for (std::size_t r = k + 1; r < n; ++r) {
            const Complex m = lu(r, k) / pivot;
            lu(r, k) = m;
            if (m == Complex{}) {
                continue;
            }
            for (std::size_t c = k + 1; c < n; ++c) {
                lu(r, c) -= m * lu(k, c);
            }
        }
    }
    if (max_pivot > kMaxPivotRatio * min_pivot) {
        throw SingularBlock("ill-conditioned matrix: LU pivot ratio " + std::to_string(max_pivot / min_pivot) +
                            " exceeds 1e12");
    }
    return f;
}

} // namespace

ComplexMatrix inverse(const ComplexMatrix& a) {
    require_square(a, "inverse");
    const std::size_t n = a.rows();
    const LuFactors f = lu_factor(a);
    const auto& lu = f.lu;

    ComplexMatrix inv(n, n);
    std::vector<Complex> y(n);
    for (std::size_t col = 0; col < n; ++col) {
        // Solve L y = P e_col.
        for (std::size_t i = 0; i < n; ++i) {
            Complex s = (f.perm[i] == col) ? Complex{1.0} : Complex{};
            for (std::size_t k = 0; k < i; ++k) {
                s -= lu(i, k) * y[k];
            }
            y[i] = s;
        }
        // Solve U x = y.
        for (std::size_t i = n; i-- > 0;) {
            Complex s = y[i];
            for (std::size_t k = i + 1; k < n; ++k) {
                s -= lu(i, k) * inv(k, col);
            }
            inv(i, col) = s / lu(i, i);
        }
    }
    return inv;
}

ComplexMatrix left_pinv(const ComplexMatrix& a) {
    if (a.rows() < a.cols()) {
        throw DimensionMismatch("left_pinv: expected rows >= cols, got " + shape(a));
    }
    const ComplexMatrix ah = conj_transpose(a);
    return matmul(inverse(matmul(ah, a)), ah);
}

// ---------------------------------------------------------------------------
// Hermitian eigenproblem

HermitianEigen hermitian_eig(const ComplexMatrix& a) {
    require_square(a, "hermitian_eig");
    const std::size_t n = a.rows();
    const double norm = frobenius_norm(a);
    if (frobenius_norm(a - conj_transpose(a)) > 1e-9 * norm) {
        throw NotHermitian("hermitian_eig: input is not Hermitian");
    }

    // Work on the exactly Hermitian part.
    ComplexMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        m(i, i) = a(i, i).real();
        for (std::size_t j = i + 1; j < n; ++j) {
            const Complex v = 0.5 * (a(i, j) + std::conj(a(j, i)));
            m(i, j) = v;
            m(j, i) = std::conj(v);
        }
    }
    ComplexMatrix v = ComplexMatrix::identity(n);

    const double tol = 1e-12 * norm;
    auto off_norm = [&] {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = i + 1; j < n; ++j) {
                s += 2.0 * std::norm(m(i, j));
            }
        }
        return std::sqrt(s);
    };

    constexpr int kMaxSweeps = 100;
    bool converged = off_norm() <= tol;
    for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex apq = m(p, q);
                const double g = std::abs(apq);
                if (g == 0.0) {
                    continue;
                }
                const Complex e = apq / g;
                const double app = m(p, p).real();
                const double aqq = m(q, q).real();
                const double tau = (aqq - app) / (2.0 * g);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                // J = [[c, s e], [-s conj(e), c]] on (p, q); m <- J^+ m J, v <- v J.
                const Complex jpq = s * e;
                const Complex jqp = -s * std::conj(e);
                for (std::size_t r = 0; r < n; ++r) {
                    const Complex mp = m(r, p);
                    const Complex mq = m(r, q);
                    m(r, p) = c * mp + jqp * mq;
                    m(r, q) = jpq * mp + c * mq;
                }
                for (std::size_t col = 0; col < n; ++col) {
                    const Complex mp = m(p, col);
                    const Complex mq = m(q, col);
                    m(p, col) = c * mp + std::conj(jqp) * mq;
                    m(q, col) = std::conj(jpq) * mp + c * mq;
                }
                m(p, q) = 0.0;
                m(q, p) = 0.0;
                m(p, p) = m(p, p).real();
                m(q, q) = m(q, q).real();
                for (std::size_t r = 0; r < n; ++r) {
                    const Complex vp = v(r, p);
                    const Complex vq = v(r, q);
                    v(r, p) = c * vp + jqp * vq;
                    v(r, q) = jpq * vp + c * vq;
                }
            }
        }
        converged = off_norm() <= tol;
    }
    if (!converged) {
        throw NoConvergence("hermitian_eig: Jacobi iteration did not converge in 100 sweeps");
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return m(x, x).real() > m(y, y).real(); });

    HermitianEigen out{std::vector<double>(n), ComplexMatrix(n, n)};
    for (std::size_t k = 0; k < n; ++k) {
        out.eigenvalues[k] = m(order[k], order[k]).real();
        for (std::size_t r = 0; r < n; ++r) {
            out.eigenvectors(r, k) = v(r, order[k]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// General eigenvalues

namespace {

// Householder reduction to upper Hessenberg form (similarity transform).
void reduce_to_hessenberg(ComplexMatrix& h) {
    const std::size_t n = h.rows();
    std::vector<Complex> v(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double xnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            xnorm2 += std::norm(h(i, k));
        }
        const double xnorm = std::sqrt(xnorm2);
        double tail2 = xnorm2 - std::norm(h(k + 1, k));
        if (xnorm == 0.0 || tail2 <= 0.0) {
            continue;
        }
        const Complex x0 = h(k + 1, k);
        const Complex phase = (std::abs(x0) == 0.0) ? Complex{1.0} : x0 / std::abs(x0);
        std::fill(v.begin(), v.end(), Complex{});
        v[k + 1] = x0 + phase * xnorm;
        for (std::size_t i = k + 2; i < n; ++i) {
            v[i] = h(i, k);
        }
        double vnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i) {
            vnorm2 += std::norm(v[i]);
        }
        const double beta = 2.0 / vnorm2;
        // h <- (I - beta v v^+) h
        for (std::size_t c = 0; c < n; ++c) {
            Complex dot{};
            for (std::size_t i = k + 1; i < n; ++i) {
                dot += std::conj(v[i]) * h(i, c);
            }
            dot *= beta;
            for (std::size_t i = k + 1; i < n; ++i) {
                h(i, c) -= v[i] * dot;
            }
        }
        // h <- h (I - beta v v^+)
        for (std::size_t r = 0; r < n; ++r) {
            Complex dot{};
            for (std::size_t i = k + 1; i < n; ++i) {
                dot += h(r, i) * v[i];
            }
            dot *= beta;
            for (std::size_t i = k + 1; i < n; ++i) {
                h(r, i) -= dot * std::conj(v[i]);
            }
        }
        for (std::size_t i = k + 2; i < n; ++i) {
            h(i, k) = 0.0;
        }
    }
}

Complex wilkinson_shift(Complex a, Complex b, Complex c, Complex d) {
    const Complex half_diff = 0.5 * (a - d);
    const Complex disc = std::sqrt(half_diff * half_diff + b * c);
    const Complex mean = 0.5 * (a + d);
    const Complex mu1 = mean + disc;
    const Complex mu2 = mean - disc;
    return std::abs(mu1 - d) < std::abs(mu2 - d) ? mu1 : mu2;
}

} // namespace

std::vector<Complex> general_eigenvalues(const ComplexMatrix& a) {
    require_square(a, "general_eigenvalues");
    const std::size_t n = a.rows();
    ComplexMatrix h = a;
    reduce_to_hessenberg(h);

    std::vector<Complex> eig(n);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const std::size_t max_iter = 100 * n;
    std::size_t total_iter = 0;
    std::size_t since_deflation = 0;
    std::vector<std::pair<Complex, Complex>> rot(n);

    std::size_t hi = n - 1;
    while (hi > 0) {
        std::size_t lo = hi;
        while (lo > 0) {
            const double scale = std::abs(h(lo - 1, lo - 1)) + std::abs(h(lo, lo));
            if (std::abs(h(lo, lo - 1)) <= eps * scale || std::abs(h(lo, lo - 1)) < std::numeric_limits<double>::min()) {
                h(lo, lo - 1) = 0.0;
                break;
            }
            --lo;
        }
        if (lo == hi) {
            eig[hi] = h(hi, hi);
            --hi;
            since_deflation = 0;
            continue;
        }
        if (++total_iter > max_iter) {
            throw NoConvergence("general_eigenvalues: QR iteration did not converge");
        }
        ++since_deflation;

        Complex mu;
        if (since_deflation % 11 == 0) {
            // Exceptional shift to break cycles.
            mu = h(hi, hi) + std::abs(h(hi, hi - 1)) * Complex(0.75, 0.4375);
        } else {
            mu = wilkinson_shift(h(hi - 1, hi - 1), h(hi - 1, hi), h(hi, hi - 1), h(hi, hi));
        }

        for (std::size_t i = lo; i <= hi; ++i) {
            h(i, i) -= mu;
        }
        for (std::size_t k = lo; k < hi; ++k) {
            const Complex x = h(k, k);
            const Complex y = h(k + 1, k);
            const double r = std::hypot(std::abs(x), std::abs(y));
            const Complex c = (r == 0.0) ? Complex{1.0} : x / r;
            const Complex s = (r == 0.0) ? Complex{} : y / r;
            rot[k] = {c, s};
            for (std::size_t j = k; j <= hi; ++j) {
                const Complex hk = h(k, j);
                const Complex hk1 = h(k + 1, j);
                h(k, j) = std::conj(c) * hk + std::conj(s) * hk1;
                h(k + 1, j) = -s * hk + c * hk1;
            }
        }
        for (std::size_t k = lo; k < hi; ++k) {
            const auto [c, s] = rot[k];
            const std::size_t last = std::min(k + 2, hi);
            for (std::size_t i = lo; i <= last; ++i) {
                const Complex hk = h(i, k);
                const Complex hk1 = h(i, k + 1);
                h(i, k) = hk * c + hk1 * s;
                h(i, k + 1) = -hk * std::conj(s) + hk1 * std::conj(c);
            }
        }
        for (std::size_t i = lo; i <= hi; ++i) {
            h(i, i) += mu;
        }
    }
    eig[0] = h(0, 0);
    return eig;
}

// ---------------------------------------------------------------------------
// Singular values, subspaces

std::vector<double> singular_values(const ComplexMatrix& a) {
    // Eigenvalues of the Hermitian dilation [[0, a], [a^+, 0]] are +-sigma_k plus
    // |m - n| zeros. Small singular values keep absolute accuracy eps*||a||
    // instead of the sqrt(eps)*||a|| floor of the normal-equations route.
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    ComplexMatrix dil(m + n, m + n);
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            dil(i, m + j) = a(i, j);
            dil(m + j, i) = std::conj(a(i, j));
        }
    }
    const auto eig = hermitian_eig(dil);
    std::vector<double> sv(eig.eigenvalues.begin(), eig.eigenvalues.begin() + static_cast<std::ptrdiff_t>(n));
    for (auto& s : sv) {
        s = std::abs(s);
    }
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

std::vector<std::vector<Complex>> orthonormal_columns(const ComplexMatrix& a, double rank_tol) {
    const std::size_t m = a.rows();
    double max_norm = 0.0;
    std::vector<std::vector<Complex>> cols(a.cols(), std::vector<Complex>(m));
    for (std::size_t j = 0; j < a.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < m; ++i) {
            cols[j][i] = a(i, j);
            s += std::norm(a(i, j));
        }
        max_norm = std::max(max_norm, std::sqrt(s));
    }
    std::vector<std::vector<Complex>> basis;
    if (max_norm == 0.0) {
        return basis;
    }
    for (auto& col : cols) {
        // Two passes of modified Gram-Schmidt.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis) {
                Complex dot{};
                for (std::size_t i = 0; i < m; ++i) {
                    dot += std::conj(q[i]) * col[i];
                }
                for (std::size_t i = 0; i < m; ++i) {
                    col[i] -= dot * q[i];
                }
            }
        }
        double s = 0.0;
        for (const auto& z : col) {
            s += std::norm(z);
        }
        const double nrm = std::sqrt(s);
        if (nrm <= rank_tol * max_norm) {
            continue;
        }
        for (auto& z : col) {
            z /= nrm;
        }
        basis.push_back(std::move(col));
        if (basis.size() == m) {
            break;
        }
    }
    return basis;
}

double principal_angle(const ComplexMatrix& rows_op, const ComplexMatrix& cols_op) {
    if (rows_op.cols() != cols_op.rows()) {
        throw DimensionMismatch("principal_angle: " + shape(rows_op) + " rows vs " + shape(cols_op) + " columns");
    }
    const auto q1 = orthonormal_columns(conj_transpose(rows_op));
    const auto q2 = orthonormal_columns(cols_op);
    if (q1.empty() || q2.empty()) {
        throw DegenerateSubspace("principal_angle: input has numerical rank 0");
    }
    const std::size_t dim = cols_op.rows();
    ComplexMatrix cross(q1.size(), q2.size());
    for (std::size_t i = 0; i < q1.size(); ++i) {
        for (std::size_t j = 0; j < q2.size(); ++j) {
            Complex dot{};
            for (std::size_t r = 0; r < dim; ++r) {
                dot += std::conj(q1[i][r]) * q2[j][r];
            }
            cross(i, j) = dot;
        }
    }
    const double cos_max = singular_values(cross).front();
    if (cos_max <= 16.0 * std::numeric_limits<double>::epsilon()) {
        return std::acos(0.0);
    }
    return std::acos(std::min(cos_max, 1.0));
}

} // namespace phaseop
