#pragma once

#include <functional>
#include <vector>

#include "matflow/matrix.hpp"

namespace matflow {

/// Spectral decomposition h = V diag(eigenvalues) V^dagger of a Hermitian
/// matrix. Eigenvalues ascend; columns of V are the eigenvectors.
struct EigDecomposition {
    std::vector<double> eigenvalues;
    Matrix eigenvectors;

    Matrix reconstruct() const;
};

/// Cyclic Jacobi eigensolver for Hermitian matrices.
///
/// Sweeps run over (p, q) pairs in row order until the off-diagonal Frobenius
/// norm falls below 1e-13 * max(1, |h|_F) or 50 sweeps have run. The output is
/// canonicalized so it depends only on the input:
///  - eigenvalues closer than 1e-9 form a cluster; each cluster's subspace is
///    re-spanned by Gram-Schmidt on its projections of e_0, e_1, ... so the
///    basis does not depend on the rotation history;
///  - vectors in a cluster are ordered by the index of their largest-magnitude
///    component;
///  - each vector's first component above 1e-8 of its maximum is made real
///    and positive.
/// Throws InvalidInput for non-Hermitian input.
EigDecomposition hermitian_eig(const Matrix& h);

/// Eigenvalues only (same solver).
std::vector<double> hermitian_eigenvalues(const Matrix& h);

/// V diag(f(lambda_i)) V^dagger. Throws DomainError naming the eigenvalue if f
/// returns a non-finite value there.
Matrix matrix_function(const Matrix& h, const std::function<double(double)>& f);
Matrix matrix_function(const EigDecomposition& eig, const std::function<double(double)>& f);
/// Complex-valued spectral calculus, used for U = exp(2 pi i X / n).
Matrix matrix_function_complex(const EigDecomposition& eig, const std::function<Complex(double)>& f);

/// Sum of |eigenvalues| of a Hermitian matrix.
double trace_norm(const Matrix& a);
/// Sum of singular values; agrees with trace_norm on Hermitian input.
double schatten1_norm(const Matrix& a);
double min_eigenvalue(const Matrix& h);

} // namespace matflow
