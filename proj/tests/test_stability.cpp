#include <doctest.h>

#include <cmath>
#include <numbers>

#include "matflow/errors.hpp"
#include "matflow/linalg.hpp"
#include "matflow/random.hpp"
#include "matflow/stability.hpp"
#include "oracle.hpp"

using namespace matflow;

namespace {

Matrix unit_pd(std::size_t n, Rng& rng) {
    Matrix a = random_psd(n, rng) + 1e-2 * Matrix::identity(n);
    return a * (1.0 / hs_norm(a));
}

Matrix nearby(const Matrix& u, double eps, Rng& rng) {
    Matrix h = random_hermitian(u.n(), rng);
    Matrix v = u + h * (eps / hs_norm(h));
    return v * (1.0 / hs_norm(v));
}

} // namespace

TEST_CASE("eta golden values") {
    CHECK(eta(0.0) == 0.0);
    CHECK(std::abs(eta(1.0 / std::numbers::e) - 1.0 / std::numbers::e) <= 1e-15);
    CHECK(eta(1.0) == 0.0);
    CHECK_THROWS_AS(eta(-0.1), InvalidInput);
    CHECK_THROWS_AS(eta(1.5), InvalidInput);
}

TEST_CASE("von Neumann entropy") {
    for (std::size_t n : {2u, 3u, 5u}) {
        const Matrix rho = Matrix::identity(n) * (1.0 / double(n));
        CHECK(von_neumann_entropy(rho) == doctest::Approx(std::log(double(n))).epsilon(1e-14));
    }
    Rng rng(1);
    const Matrix p = unit_pd(4, rng);
    const auto ev = oracle::hermitian_eigenvalues(p);
    double s = 0.0;
    for (double l : ev) s -= l * std::log(l);
    CHECK(von_neumann_entropy(p) == doctest::Approx(s).epsilon(1e-12));
    Matrix singular = Matrix::identity(2);
    singular(1, 1) = 0.0;
    CHECK_THROWS_AS(von_neumann_entropy(singular), DomainError);
}

TEST_CASE("trace distance") {
    Rng rng(2);
    const Matrix u = random_hermitian(4, rng), v = random_hermitian(4, rng);
    CHECK(trace_distance(u, v) == doctest::Approx(oracle::hermitian_eigenvalues(u - v).cwiseAbs().sum()));
    CHECK(trace_distance(u, u) == 0.0);
}

TEST_CASE("Fannes inequality on in-regime pairs") {
    Rng rng(3);
    for (int k = 0; k < 50; ++k) {
        const std::size_t n = 2 + k % 4;
        const Matrix u = unit_pd(n, rng);
        const Matrix v = nearby(u, 1e-3, rng);
        for (std::size_t d : {n, n * n}) {
            const auto c = fannes_check(u, v, d);
            CHECK(c.in_regime);
            CHECK(c.holds);
            CHECK(c.entropy_gap <= c.bound);
        }
    }
    const Matrix a = Matrix::identity(2) * 0.9, b = Matrix::identity(2) * 0.1;
    CHECK(std::isnan(fannes_bound(a, b, 2)));
    CHECK_FALSE(fannes_check(a, b, 2).in_regime);
}

TEST_CASE("HS stability experiment") {
    Rng rng(4);
    const TorusModel m = build_model(3);
    const Matrix u = unit_pd(3, rng);
    const Matrix v = nearby(u, 1e-2, rng);
    StabilityOptions o;
    o.t_end = 2.0;
    o.step = 0.1;
    const auto r = hs_stability_experiment(m, u, v, o);
    CHECK(r.status == "ok");
    CHECK(r.times.size() == 21);
    CHECK(r.estimated_C1 >= 0.0);
    CHECK(r.all_bounds_hold);
    for (std::size_t j = 0; j < r.times.size(); ++j)
        CHECK(r.hs_dist_sq[j] <= std::exp(r.estimated_C1 * r.times[j]) * r.hs_dist_sq[0] * (1 + 1e-8));
    CHECK(r.fannes_d == 3);
    CHECK_THROWS_AS(hs_stability_experiment(m, u, u, o), InvalidInput);
    const auto j = to_json(r);
    CHECK(j.contains("estimated_C1"));
    CHECK(j["times"].size() == 21);
}

TEST_CASE("entropy stability experiment") {
    Rng rng(5);
    const TorusModel m = build_model(2);
    const Matrix u = unit_pd(2, rng);
    const Matrix v = nearby(u, 1e-3, rng);
    StabilityOptions o;
    o.t_end = 2.0;
    o.step = 0.1;
    for (std::size_t d : {std::size_t{2}, std::size_t{4}}) {
        o.fannes_d = d;
        const auto r = entropy_stability_experiment(m, u, v, o);
        CHECK(r.status == "ok");
        CHECK(r.all_bounds_hold);
        for (double g : r.entropy_gap) CHECK(g <= r.theorem_rhs + 1e-10);
    }
    // A traceless state is never positive definite.
    Matrix h = random_hermitian(2, rng);
    h(0, 0) = 1.0;
    h(1, 1) = -1.0;
    h *= 1.0 / hs_norm(h);
    CHECK(entropy_stability_experiment(m, h, u, o).status == "out-of-regime");
}
