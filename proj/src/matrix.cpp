#include "matflow/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "matflow/errors.hpp"
#include "matflow/kernels.hpp"

namespace matflow {

Matrix::Matrix(std::size_t n) : n_(n), data_(n * n) {}

Matrix Matrix::identity(std::size_t n) {
    Matrix m(n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
}

Matrix Matrix::diagonal(std::span<const double> values) {
    Matrix m(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

Matrix Matrix::diagonal(std::span<const Complex> values) {
    Matrix m(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) m(i, i) = values[i];
    return m;
}

Matrix Matrix::unit(std::size_t n, std::size_t j, std::size_t k) {
    Matrix m(n);
    m(j, k) = 1.0;
    return m;
}

Matrix Matrix::from_vec(std::size_t n, std::span<const Complex> v) {
    if (v.size() != n * n) throw InvalidInput("from_vec: vector length is not n^2");
    Matrix m(n);
    std::copy(v.begin(), v.end(), m.data_.begin());
    return m;
}

Matrix Matrix::adjoint() const {
    Matrix r(n_);
    for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t j = 0; j < n_; ++j) r(k, j) = std::conj((*this)(j, k));
    return r;
}

Matrix Matrix::transpose() const {
    Matrix r(n_);
    for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t j = 0; j < n_; ++j) r(k, j) = (*this)(j, k);
    return r;
}

Complex Matrix::trace() const {
    Complex t = 0.0;
    for (std::size_t i = 0; i < n_; ++i) t += (*this)(i, i);
    return t;
}

double Matrix::max_abs() const {
    double m = 0.0;
    for (const auto& z : data_) m = std::max(m, std::abs(z));
    return m;
}

bool Matrix::is_hermitian() const {
    const double tol = 1e-12 * std::max(1.0, max_abs());
    for (std::size_t k = 0; k < n_; ++k)
        for (std::size_t j = 0; j <= k; ++j)
            if (std::abs((*this)(j, k) - std::conj((*this)(k, j))) > tol) return false;
    return true;
}

Matrix& Matrix::operator+=(const Matrix& other) {
    require_same_dim(*this, other, "matrix addition");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += other.data_[i];
    return *this;
}

Matrix& Matrix::operator-=(const Matrix& other) {
    require_same_dim(*this, other, "matrix subtraction");
    for (std::size_t i = 0; i < data_.size(); ++i) data_[i] -= other.data_[i];
    return *this;
}

Matrix& Matrix::operator*=(Complex s) {
    for (auto& z : data_) z *= s;
    return *this;
}

Matrix& Matrix::operator*=(double s) {
    for (auto& z : data_) z *= s;
    return *this;
}

Matrix operator+(Matrix a, const Matrix& b) { return a += b; }
Matrix operator-(Matrix a, const Matrix& b) { return a -= b; }
Matrix operator-(Matrix a) { return a *= -1.0; }
Matrix operator*(Matrix a, Complex s) { return a *= s; }
Matrix operator*(Complex s, Matrix a) { return a *= s; }
Matrix operator*(Matrix a, double s) { return a *= s; }
Matrix operator*(double s, Matrix a) { return a *= s; }

Matrix operator*(const Matrix& a, const Matrix& b) {
    require_same_dim(a, b, "matrix product");
    Matrix c(a.n());
    kernels::gemm(a.n(), a.n(), a.n(), a.data(), b.data(), c.data());
    return c;
}

Matrix commutator(const Matrix& a, const Matrix& b) { return a * b - b * a; }

Complex hs_inner(const Matrix& a, const Matrix& b) {
    require_same_dim(a, b, "hs_inner");
    Complex s = 0.0;
    const auto x = a.data();
    const auto y = b.data();
    for (std::size_t i = 0; i < x.size(); ++i) s += std::conj(x[i]) * y[i];
    return s;
}

double hs_norm_sq(const Matrix& a) {
    double s = 0.0;
    for (const auto& z : a.data()) s += std::norm(z);
    return s;
}

double hs_norm(const Matrix& a) { return std::sqrt(hs_norm_sq(a)); }

double max_abs_diff(const Matrix& a, const Matrix& b) {
    require_same_dim(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.data().size(); ++i) m = std::max(m, std::abs(a.data()[i] - b.data()[i]));
    return m;
}

void require_same_dim(const Matrix& a, const Matrix& b, const char* what) {
    if (a.n() != b.n())
        throw InvalidInput(std::string(what) + ": dimension mismatch (" + std::to_string(a.n()) + " vs " +
                           std::to_string(b.n()) + ")");
}

void require_hermitian(const Matrix& a, const char* what) {
    if (!a.is_hermitian()) throw InvalidInput(std::string(what) + ": matrix is not Hermitian");
}

} // namespace matflow
