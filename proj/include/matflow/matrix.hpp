#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace matflow {

using Complex = std::complex<double>;

/// Dense square complex matrix stored column-major, so that the raw storage
/// is exactly the column-stacking vectorization vec(a) with
/// vec(a)[j + k*n] = a(j, k).
class Matrix {
public:
    Matrix() = default;
    explicit Matrix(std::size_t n);

    static Matrix identity(std::size_t n);
    static Matrix diagonal(std::span<const double> values);
    static Matrix diagonal(std::span<const Complex> values);
    /// Single-entry matrix E_{jk}.
    static Matrix unit(std::size_t n, std::size_t j, std::size_t k);
    /// Reinterpret a length n*n vector as the matrix it vectorizes.
    static Matrix from_vec(std::size_t n, std::span<const Complex> v);

    std::size_t n() const noexcept { return n_; }
    bool empty() const noexcept { return n_ == 0; }

    Complex& operator()(std::size_t row, std::size_t col) { return data_[row + col * n_]; }
    const Complex& operator()(std::size_t row, std::size_t col) const { return data_[row + col * n_]; }

    std::span<Complex> data() noexcept { return data_; }
    std::span<const Complex> data() const noexcept { return data_; }

    Matrix adjoint() const;
    Matrix transpose() const;
    Complex trace() const;
    double max_abs() const;
    /// Hermitian within 1e-12 * max(1, max|a_jk|).
    bool is_hermitian() const;

    Matrix& operator+=(const Matrix& other);
    Matrix& operator-=(const Matrix& other);
    Matrix& operator*=(Complex s);
    Matrix& operator*=(double s);

    bool operator==(const Matrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<Complex> data_;
};

Matrix operator+(Matrix a, const Matrix& b);
Matrix operator-(Matrix a, const Matrix& b);
Matrix operator-(Matrix a);
Matrix operator*(Matrix a, Complex s);
Matrix operator*(Complex s, Matrix a);
Matrix operator*(Matrix a, double s);
Matrix operator*(double s, Matrix a);
/// Matrix product.
Matrix operator*(const Matrix& a, const Matrix& b);

/// ab - ba
Matrix commutator(const Matrix& a, const Matrix& b);

/// Hilbert-Schmidt inner product tau(a^dagger b) with the unnormalized trace;
/// conjugate-linear in the first argument.
Complex hs_inner(const Matrix& a, const Matrix& b);
double hs_norm_sq(const Matrix& a);
double hs_norm(const Matrix& a);

double max_abs_diff(const Matrix& a, const Matrix& b);

/// Throws InvalidInput unless both matrices have the same dimension.
void require_same_dim(const Matrix& a, const Matrix& b, const char* what);
/// Throws InvalidInput unless a is Hermitian.
void require_hermitian(const Matrix& a, const char* what);

} // namespace matflow
