#pragma once

#include <complex>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

#include "phaseop/errors.hpp"

namespace phaseop {

using Complex = std::complex<double>;

// Dense complex matrix, row-major, value semantics. Always at least 1x1.
class ComplexMatrix {
public:
    // Zero-filled rows x cols matrix.
    ComplexMatrix(std::size_t rows, std::size_t cols);
    ComplexMatrix(std::size_t rows, std::size_t cols, std::vector<Complex> data);
    ComplexMatrix(std::initializer_list<std::initializer_list<Complex>> rows);

    static ComplexMatrix identity(std::size_t n);
    static ComplexMatrix column(std::span<const Complex> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool is_square() const noexcept { return rows_ == cols_; }

    Complex& operator()(std::size_t r, std::size_t c) noexcept { return data_[r * cols_ + c]; }
    const Complex& operator()(std::size_t r, std::size_t c) const noexcept { return data_[r * cols_ + c]; }

    std::span<Complex> row(std::size_t r) noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const Complex> row(std::size_t r) const noexcept { return {data_.data() + r * cols_, cols_}; }
    std::span<const Complex> data() const noexcept { return data_; }

    // Copy of the nr x nc submatrix starting at (r0, c0).
    ComplexMatrix block(std::size_t r0, std::size_t c0, std::size_t nr, std::size_t nc) const;
    void set_block(std::size_t r0, std::size_t c0, const ComplexMatrix& src);

    bool all_finite() const noexcept;

    ComplexMatrix& operator+=(const ComplexMatrix& rhs);
    ComplexMatrix& operator-=(const ComplexMatrix& rhs);
    ComplexMatrix& operator*=(Complex s) noexcept;

    bool operator==(const ComplexMatrix&) const = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<Complex> data_;
};

ComplexMatrix operator+(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator-(ComplexMatrix a, const ComplexMatrix& b);
ComplexMatrix operator*(Complex s, ComplexMatrix a);
ComplexMatrix operator*(const ComplexMatrix& a, const ComplexMatrix& b);

ComplexMatrix matmul(const ComplexMatrix& a, const ComplexMatrix& b);
ComplexMatrix conj_transpose(const ComplexMatrix& a);
Complex trace(const ComplexMatrix& a);
double frobenius_norm(const ComplexMatrix& a);

// Pivot-ratio gate used by inverse(): largest/smallest |LU pivot| must stay below this.
inline constexpr double kMaxPivotRatio = 1e12;

// LU with partial pivoting. Throws SingularBlock when the pivot ratio exceeds
// kMaxPivotRatio or a pivot is exactly zero.
ComplexMatrix inverse(const ComplexMatrix& a);

// (a^+ a)^{-1} a^+ for tall full-column-rank a.
ComplexMatrix left_pinv(const ComplexMatrix& a);

struct HermitianEigen {
    std::vector<double> eigenvalues; // descending
    ComplexMatrix eigenvectors;      // column k pairs with eigenvalues[k]
};

// Cyclic complex Jacobi. Throws NotHermitian if ||a - a^+||_F > 1e-9 ||a||_F
// and NoConvergence after 100 sweeps.
HermitianEigen hermitian_eig(const ComplexMatrix& a);

// Eigenvalues of a general square matrix via Hessenberg reduction and
// Wilkinson-shifted complex QR. Order is unspecified.
std::vector<Complex> general_eigenvalues(const ComplexMatrix& a);

// Descending singular values; count equals a.cols().
std::vector<double> singular_values(const ComplexMatrix& a);

// Orthonormal basis for the column space of a (columns with relative residual
// below rank_tol are dropped). May return an empty vector of columns.
std::vector<std::vector<Complex>> orthonormal_columns(const ComplexMatrix& a, double rank_tol = 1e-10);

// Smallest principal angle between the row space of `rows_op` and the column
// space of `cols_op`, in radians.
double principal_angle(const ComplexMatrix& rows_op, const ComplexMatrix& cols_op);

} // namespace phaseop
