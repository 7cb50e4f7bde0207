#include "matflow/kernels.hpp"

namespace matflow::kernels::serial {

void gemm(std::size_t rows, std::size_t inner, std::size_t cols, std::span<const Complex> a,
          std::span<const Complex> b, std::span<Complex> c) {
    for (std::size_t j = 0; j < cols; ++j) {
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
    for (std::size_t j = 0; j < cols; ++j) {
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
    Complex* ap = a.data() + p * n;
    Complex* aq = a.data() + q * n;
    for (std::size_t k = 0; k < n; ++k) {
        const Complex x = ap[k];
        const Complex y = aq[k];
        ap[k] = c * x - sd * y;
        aq[k] = s * x + cd * y;
    }
    for (std::size_t k = 0; k < n; ++k) {
        Complex& x = a[p + k * n];
        Complex& y = a[q + k * n];
        const Complex xo = x;
        x = c * xo - sdc * y;
        y = s * xo + cdc * y;
    }
    Complex* vp = v.data() + p * n;
    Complex* vq = v.data() + q * n;
    for (std::size_t k = 0; k < n; ++k) {
        const Complex x = vp[k];
        const Complex y = vq[k];
        vp[k] = c * x - sd * y;
        vq[k] = s * x + cd * y;
    }
}

} // namespace matflow::kernels::serial
