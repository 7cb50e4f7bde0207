#pragma once

// Data-parallel inner loops. Every kernel exists twice: a plain serial
// reference and an OpenMP variant. Each output element is produced by exactly
// one thread with the same operation order as the reference, so both variants
// return bit-identical results regardless of the thread count.

#include <cstddef>
#include <span>

#include "matflow/matrix.hpp"

namespace matflow::kernels {

/// Parameters of one complex Jacobi rotation G acting on the (p, q) plane:
/// G_pp = c, G_pq = s, G_qp = -s*d, G_qq = c*d with |d| = 1.
struct JacobiRotation {
    std::size_t p;
    std::size_t q;
    double c;
    double s;
    Complex d;
};

namespace serial {

/// c (rows x cols) = a (rows x inner) * b (inner x cols), all column-major.
void gemm(std::size_t rows, std::size_t inner, std::size_t cols,
          std::span<const Complex> a, std::span<const Complex> b, std::span<Complex> c);

/// c (rows x cols) = a^dagger * b with a stored as (inner x rows).
void gemm_adjoint_left(std::size_t rows, std::size_t inner, std::size_t cols,
                       std::span<const Complex> a, std::span<const Complex> b,
                       std::span<Complex> c);

/// a <- G^dagger a G and v <- v G for an n x n Hermitian a.
void jacobi_rotate(std::size_t n, std::span<Complex> a, std::span<Complex> v, const JacobiRotation& rot);

} // namespace serial

namespace parallel {

void gemm(std::size_t rows, std::size_t inner, std::size_t cols,
          std::span<const Complex> a, std::span<const Complex> b, std::span<Complex> c);

void gemm_adjoint_left(std::size_t rows, std::size_t inner, std::size_t cols,
                       std::span<const Complex> a, std::span<const Complex> b,
                       std::span<Complex> c);

void jacobi_rotate(std::size_t n, std::span<Complex> a, std::span<Complex> v, const JacobiRotation& rot);

} // namespace parallel

/// Number of OpenMP threads available (1 when built without OpenMP).
int max_threads();

// The library calls the parallel variants.
using parallel::gemm;
using parallel::gemm_adjoint_left;
using parallel::jacobi_rotate;

} // namespace matflow::kernels
