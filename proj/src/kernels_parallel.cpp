#include "matflow/kernels.hpp"

#include <cstdint>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace matflow::kernels {

namespace {
// Below these sizes the fork/join cost outweighs the loop.
constexpr std::size_t kGemmWork = 1u << 15;
constexpr std::size_t kRotateDim = 192;
} // namespace

int max_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

namespace parallel {

void gemm(std::size_t rows, std::size_t inner, std::size_t cols, std::span<const Complex> a,
          std::span<const Complex> b, std::span<Complex> c) {
    const bool big = rows * inner * cols >= kGemmWork;
    const auto ncols = static_cast<std::int64_t>(cols);
#pragma omp parallel for schedule(static) if (big)
    for (std::int64_t jj = 0; jj < ncols; ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        Complex* cj = c.data() + j * rows;
        for (std::size_t i = 0; i < rows; ++i) cj[i] = 0.0;
        for (std::size_t l = 0; l < inner; ++l) {
            const Complex blj = b[l + j * inner];
            const Complex* al = a.data() + l * rows;
            for (std::size_t i = 0; i < rows; ++i) cj[i] += al[i] * blj;
        }
    }
}

void gemm_adjoint_left(std::size_t rows, std::size_t inner, std::size_t cols, std::span<const Complex> a,
                       std::span<const Complex> b, std::span<Complex> c) {
    const bool big = rows * inner * cols >= kGemmWork;
    const auto ncols = static_cast<std::int64_t>(cols);
#pragma omp parallel for schedule(static) if (big)
    for (std::int64_t jj = 0; jj < ncols; ++jj) {
        const auto j = static_cast<std::size_t>(jj);
        const Complex* bj = b.data() + j * inner;
        for (std::size_t i = 0; i < rows; ++i) {
            const Complex* ai = a.data() + i * inner;
            Complex s = 0.0;
            for (std::size_t l = 0; l < inner; ++l) s += std::conj(ai[l]) * bj[l];
            c[i + j * rows] = s;
        }
    }
}

void jacobi_rotate(std::size_t n, std::span<Complex> a, std::span<Complex> v, const JacobiRotation& rot) {
    const auto [p, q, c, s, d] = rot;
    const Complex sd = s * d;
    const Complex cd = c * d;
    const Complex sdc = s * std::conj(d);
    const Complex cdc = c * std::conj(d);
    const bool big = n >= kRotateDim;
    const auto nn = static_cast<std::int64_t>(n);
    Complex* ap = a.data() + p * n;
    Complex* aq = a.data() + q * n;
    Complex* vp = v.data() + p * n;
    Complex* vq = v.data() + q * n;
    Complex* base = a.data();
#pragma omp parallel if (big)
    {
#pragma omp for schedule(static)
        for (std::int64_t kk = 0; kk < nn; ++kk) {
            const auto k = static_cast<std::size_t>(kk);
            const Complex x = ap[k];
            const Complex y = aq[k];
            ap[k] = c * x - sd * y;
            aq[k] = s * x + cd * y;
            const Complex vx = vp[k];
            const Complex vy = vq[k];
            vp[k] = c * vx - sd * vy;
            vq[k] = s * vx + cd * vy;
        }
#pragma omp for schedule(static)
        for (std::int64_t kk = 0; kk < nn; ++kk) {
            const auto k = static_cast<std::size_t>(kk);
            Complex& x = base[p + k * n];
            Complex& y = base[q + k * n];
            const Complex xo = x;
            x = c * xo - sdc * y;
            y = s * xo + cdc * y;
        }
    }
}

} // namespace parallel
} // namespace matflow::kernels
