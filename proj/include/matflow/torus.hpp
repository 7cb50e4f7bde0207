#pragma once

#include <memory>
#include <string_view>
#include <vector>

#include "matflow/matrix.hpp"

namespace matflow {

enum class GeneratorVariant { ClockShift, Custom };

GeneratorVariant parse_variant(std::string_view name);
std::string_view variant_name(GeneratorVariant v);

/// Ascending Laplacian spectrum with HS-orthonormal eigen-matrices.
struct EigenBasis {
    std::vector<double> eigenvalues;
    std::vector<Matrix> eigenmatrices;
    /// Smallest nonzero eigenvalue lambda_1.
    double gap = 0.0;

    /// Column-stacked eigen-matrices as one N x N unitary (N = n^2).
    Matrix columns;

    std::size_t size() const { return eigenvalues.size(); }
    double lambda_max() const { return eigenvalues.back(); }
};

/// Expansion coefficients u_i = <phi_i, a> in the Laplacian eigenbasis.
struct SpectralCoefficients {
    std::vector<Complex> coeffs;
};

/// Matrix-geometry model: Hermitian generators X, Y with U = exp(2 pi i X/n),
/// V = exp(2 pi i Y/n), derivations delta_1 = [Y, .], delta_2 = -[X, .] and the
/// Laplacian Delta = delta_1^* delta_1 + delta_2^* delta_2 = [Y,[Y,.]] + [X,[X,.]].
///
/// Immutable; the eigenbasis is computed on first use and shared between
/// copies.
class TorusModel {
public:
    /// X = diag(0..n-1), Y = F X F^dagger with the unitary DFT matrix F, making
    /// U the clock matrix and V a cyclic shift. Throws InvalidInput for n < 2.
    static TorusModel clock_shift(std::size_t n);
    /// User-supplied generators. Throws InvalidInput if they are not
    /// Hermitian or differ in size, and DegenerateModelError if the Laplacian
    /// kernel is larger than the scalars.
    static TorusModel custom(Matrix x, Matrix y);

    std::size_t n() const { return x_.n(); }
    GeneratorVariant variant() const { return variant_; }
    const Matrix& x() const { return x_; }
    const Matrix& y() const { return y_; }
    const Matrix& u() const { return u_; }
    const Matrix& v() const { return v_; }

    const EigenBasis& eigenbasis() const;
    bool has_eigenbasis() const;

private:
    TorusModel(GeneratorVariant variant, Matrix x, Matrix y);

    struct Cache;
    GeneratorVariant variant_;
    Matrix x_, y_, u_, v_;
    std::shared_ptr<Cache> cache_;
};

/// build_model(n, variant); custom models go through TorusModel::custom.
TorusModel build_model(std::size_t n, GeneratorVariant variant = GeneratorVariant::ClockShift);

Matrix delta1(const TorusModel& m, const Matrix& a);
Matrix delta2(const TorusModel& m, const Matrix& a);
Matrix laplacian_apply(const TorusModel& m, const Matrix& a);

/// n^2 x n^2 matrix L = L1^dagger L1 + L2^dagger L2 acting on column-stacked
/// vectors, with L1 = I (x) Y - Y^T (x) I and L2 = -(I (x) X - X^T (x) I).
Matrix laplacian_superoperator(const TorusModel& m);

/// Full spectral decomposition of the super-operator. Throws
/// DegenerateModelError if the kernel is not one-dimensional.
EigenBasis compute_eigenbasis(const TorusModel& m);

/// D(c) = |delta_1 c|^2 + |delta_2 c|^2.
double dirichlet_energy(const TorusModel& m, const Matrix& c);
/// D(c) / M(c); throws InvalidInput when M(c) <= 1e-14.
double rayleigh(const TorusModel& m, const Matrix& c);

SpectralCoefficients decompose(const TorusModel& m, const Matrix& a);
Matrix reconstruct(const TorusModel& m, const SpectralCoefficients& c);

} // namespace matflow
