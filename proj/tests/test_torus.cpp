#include <doctest.h>

#include <cmath>
#include <numbers>

#include "matflow/errors.hpp"
#include "matflow/linalg.hpp"
#include "matflow/random.hpp"
#include "matflow/torus.hpp"
#include "oracle.hpp"

using namespace matflow;

TEST_CASE("clock-shift generators") {
    const std::size_t n = 5;
    const TorusModel m = build_model(n);
    CHECK(oracle::max_diff(oracle::to_eigen(m.x()), oracle::clock_x(n)) < 1e-14);
    CHECK(oracle::max_diff(oracle::to_eigen(m.y()), oracle::clock_y(n)) < 1e-13);
    CHECK(m.x().is_hermitian());
    CHECK(m.y().is_hermitian());
    // U is diagonal with n-th roots of unity, V is a cyclic shift up to orientation.
    const Complex w = std::polar(1.0, 2.0 * std::numbers::pi / double(n));
    for (std::size_t j = 0; j < n; ++j) CHECK(std::abs(m.u()(j, j) - std::pow(w, double(j))) < 1e-13);
    Matrix vn = Matrix::identity(n);
    for (std::size_t k = 0; k < n; ++k) vn = vn * m.v();
    CHECK(max_abs_diff(vn, Matrix::identity(n)) < 1e-12);
    const Matrix uv = m.u() * m.v();
    const Matrix vu = m.v() * m.u();
    const Complex q = uv(0, 1) != Complex{} ? uv(0, 1) / vu(0, 1) : uv(1, 0) / vu(1, 0);
    CHECK(max_abs_diff(uv, q * vu) < 1e-12);
    CHECK(std::abs(std::abs(q) - 1.0) < 1e-12);
}

TEST_CASE("model construction errors") {
    CHECK_THROWS_AS(build_model(1), InvalidInput);
    CHECK_THROWS_AS(build_model(0), InvalidInput);
    Matrix nonherm(3);
    nonherm(0, 1) = 1.0;
    CHECK_THROWS_AS(TorusModel::custom(nonherm, build_model(3).y()), InvalidInput);
    // Commuting generators leave a large kernel.
    CHECK_THROWS_AS(TorusModel::custom(build_model(3).x(), build_model(3).x()), DegenerateModelError);
}

TEST_CASE("n=2 spectrum and kernel") {
    const TorusModel m = build_model(2);
    const auto& b = m.eigenbasis();
    const std::vector<double> expect{0.0, 1.0, 1.0, 2.0};
    for (std::size_t i = 0; i < 4; ++i) CHECK(std::abs(b.eigenvalues[i] - expect[i]) < 1e-10);
    const Matrix k = b.eigenmatrices[0];
    const Complex phase = k(0, 0) / std::abs(k(0, 0));
    CHECK(max_abs_diff(k * std::conj(phase), Matrix::identity(2) * (1.0 / std::sqrt(2.0))) < 1e-12);
    CHECK(b.gap == doctest::Approx(1.0));
}

TEST_CASE("Laplacian matches the Kronecker oracle") {
    Rng rng(8);
    for (std::size_t n = 2; n <= 6; ++n) {
        const TorusModel m = build_model(n);
        const Matrix a = random_gaussian(n, rng);
        const auto ref = oracle::laplacian_apply(oracle::clock_x(n), oracle::clock_y(n), oracle::to_eigen(a));
        CHECK(oracle::max_diff(oracle::to_eigen(laplacian_apply(m, a)), ref) < 1e-10);

        const Matrix l = laplacian_superoperator(m);
        CHECK(l.n() == n * n);
        CHECK(l.is_hermitian());
        // L vec(a) == vec(laplacian(a)) with column stacking.
        std::vector<Complex> out(n * n);
        for (std::size_t r = 0; r < n * n; ++r)
            for (std::size_t c = 0; c < n * n; ++c) out[r] += l(r, c) * a.data()[c];
        CHECK(max_abs_diff(Matrix::from_vec(n, out), laplacian_apply(m, a)) < 1e-10);

        const auto spec = oracle::laplacian_spectrum(n);
        const auto& b = m.eigenbasis();
        for (std::size_t i = 0; i < n * n; ++i)
            CHECK(std::abs(b.eigenvalues[i] - spec(i)) < 1e-9 * std::max(1.0, spec(i)));
    }
}

TEST_CASE("Laplacian properties") {
    Rng rng(10);
    const TorusModel m = build_model(4);
    for (int t = 0; t < 5; ++t) {
        const Matrix a = random_gaussian(4, rng);
        const Matrix b = random_gaussian(4, rng);
        // self-adjoint and positive in the HS inner product
        CHECK(std::abs(hs_inner(a, laplacian_apply(m, b)) - hs_inner(laplacian_apply(m, a), b)) < 1e-9);
        CHECK(hs_inner(a, laplacian_apply(m, a)).real() >= -1e-10);
        // maps Hermitian to Hermitian and kills the trace
        const Matrix h = random_hermitian(4, rng);
        CHECK(laplacian_apply(m, h).is_hermitian());
        CHECK(std::abs(laplacian_apply(m, a).trace()) < 1e-10);
        // Dirichlet energy equals the derivation norms
        const double d = hs_norm_sq(delta1(m, a)) + hs_norm_sq(delta2(m, a));
        CHECK(dirichlet_energy(m, a) == doctest::Approx(d).epsilon(1e-12));
        CHECK(dirichlet_energy(m, a) == doctest::Approx(hs_inner(a, laplacian_apply(m, a)).real()).epsilon(1e-10));
        CHECK(rayleigh(m, 3.0 * a) == doctest::Approx(rayleigh(m, a)).epsilon(1e-12));
    }
    CHECK(laplacian_apply(m, Matrix::identity(4)).max_abs() < 1e-12);
    CHECK_THROWS_AS(rayleigh(m, Matrix(4)), InvalidInput);
}

TEST_CASE("eigenbasis is orthonormal and Hermitian-closed") {
    for (std::size_t n : {2u, 3u, 5u}) {
        const TorusModel m = build_model(n);
        const auto& b = m.eigenbasis();
        CHECK(b.size() == n * n);
        for (std::size_t i = 0; i < b.size(); ++i) {
            const Matrix& phi = b.eigenmatrices[i];
            CHECK(max_abs_diff(laplacian_apply(m, phi), b.eigenvalues[i] * phi) < 1e-9);
            CHECK(hs_norm_sq(phi) == doctest::Approx(1.0).epsilon(1e-12));
            for (std::size_t j = i + 1; j < std::min(b.size(), i + 4); ++j)
                CHECK(std::abs(hs_inner(phi, b.eigenmatrices[j])) < 1e-10);
        }
        CHECK(b.gap > 0.0);
    }
}

TEST_CASE("decompose and reconstruct are inverse") {
    Rng rng(12);
    const TorusModel m = build_model(4);
    const Matrix a = random_gaussian(4, rng);
    const auto c = decompose(m, a);
    CHECK(c.coeffs.size() == 16);
    CHECK(max_abs_diff(reconstruct(m, c), a) < 1e-12);
    double energy = 0.0;
    for (const auto& z : c.coeffs) energy += std::norm(z);
    CHECK(energy == doctest::Approx(hs_norm_sq(a)).epsilon(1e-12));
}

TEST_CASE("custom variant reproduces the clock-shift model") {
    const TorusModel ref = build_model(3);
    const TorusModel m = TorusModel::custom(ref.x(), ref.y());
    CHECK(m.variant() == GeneratorVariant::Custom);
    for (std::size_t i = 0; i < 9; ++i)
        CHECK(m.eigenbasis().eigenvalues[i] == doctest::Approx(ref.eigenbasis().eigenvalues[i]));
    CHECK(parse_variant("custom") == GeneratorVariant::Custom);
    CHECK(variant_name(GeneratorVariant::ClockShift) == "clock-shift");
    CHECK_THROWS(parse_variant("torus"));
}
