#include "matflow/random.hpp"

#include <cmath>
#include <numbers>

namespace matflow {

double Rng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double Rng::normal() {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

Complex Rng::complex_normal() {
    const double re = normal();
    const double im = normal();
    return {re, im};
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
    std::uint64_t z = seed + (index + 1) * 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Matrix random_gaussian(std::size_t n, Rng& rng) {
    Matrix g(n);
    for (auto& z : g.data()) z = rng.complex_normal();
    return g;
}

Matrix random_hermitian(std::size_t n, Rng& rng) {
    Matrix g = random_gaussian(n, rng);
    Matrix h = g + g.adjoint();
    h *= 0.5;
    return h;
}

Matrix random_psd(std::size_t n, Rng& rng) {
    Matrix b = random_gaussian(n, rng);
    Matrix p = b.adjoint() * b;
    // exact Hermitian symmetry
    for (std::size_t k = 0; k < n; ++k) {
        p(k, k) = p(k, k).real();
        for (std::size_t j = 0; j < k; ++j) p(k, j) = std::conj(p(j, k));
    }
    return p;
}

Matrix random_unitary(std::size_t n, Rng& rng) {
    Matrix q = random_gaussian(n, rng);
    for (std::size_t k = 0; k < n; ++k) {
        // twice is enough for full orthogonality in double precision
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < k; ++j) {
                Complex proj = 0.0;
                for (std::size_t i = 0; i < n; ++i) proj += std::conj(q(i, j)) * q(i, k);
                for (std::size_t i = 0; i < n; ++i) q(i, k) -= proj * q(i, j);
            }
        }
        double norm = 0.0;
        for (std::size_t i = 0; i < n; ++i) norm += std::norm(q(i, k));
        norm = std::sqrt(norm);
        for (std::size_t i = 0; i < n; ++i) q(i, k) /= norm;
    }
    return q;
}

} // namespace matflow
