#include "matflow/torus.hpp"

#include <cmath>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>

#include "matflow/errors.hpp"
#include "matflow/kernels.hpp"
#include "matflow/linalg.hpp"

namespace matflow {

GeneratorVariant parse_variant(std::string_view name) {
    if (name == "clock-shift") return GeneratorVariant::ClockShift;
    if (name == "custom") return GeneratorVariant::Custom;
    throw InvalidInput("unknown generator variant '" + std::string(name) + "'");
}

std::string_view variant_name(GeneratorVariant v) {
    return v == GeneratorVariant::ClockShift ? "clock-shift" : "custom";
}

struct TorusModel::Cache {
    std::once_flag once;
    std::optional<EigenBasis> basis;
};

namespace {

Matrix exp_2pi_i_over_n(const Matrix& h) {
    const double scale = 2.0 * std::numbers::pi / static_cast<double>(h.n());
    return matrix_function_complex(hermitian_eig(h), [scale](double x) { return std::polar(1.0, scale * x); });
}

void make_exactly_hermitian(Matrix& a) {
    for (std::size_t k = 0; k < a.n(); ++k) {
        a(k, k) = a(k, k).real();
        for (std::size_t j = 0; j < k; ++j) a(k, j) = std::conj(a(j, k));
    }
}

// Super-operator of a -> h a - a h: I (x) h - h^T (x) I in column-stacking order.
Matrix commutator_superoperator(const Matrix& h) {
    const std::size_t n = h.n();
    Matrix s(n * n);
    for (std::size_t l = 0; l < n; ++l)
        for (std::size_t k = 0; k < n; ++k) {
            const std::size_t col = k + l * n;
            for (std::size_t i = 0; i < n; ++i) s(i + l * n, col) += h(i, k);
            for (std::size_t j = 0; j < n; ++j) s(k + j * n, col) -= h(l, j);
        }
    return s;
}

} // namespace

TorusModel::TorusModel(GeneratorVariant variant, Matrix x, Matrix y)
    : variant_(variant), x_(std::move(x)), y_(std::move(y)), cache_(std::make_shared<Cache>()) {
    u_ = exp_2pi_i_over_n(x_);
    v_ = exp_2pi_i_over_n(y_);
}

TorusModel TorusModel::clock_shift(std::size_t n) {
    if (n < 2) throw InvalidInput("build_model: n must be at least 2, got " + std::to_string(n));
    std::vector<double> diag(n);
    for (std::size_t i = 0; i < n; ++i) diag[i] = static_cast<double>(i);
    Matrix x = Matrix::diagonal(std::span<const double>(diag));
    Matrix f(n);
    const double inv_sqrt = 1.0 / std::sqrt(static_cast<double>(n));
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t j = 0; j < n; ++j) {
            // reduce jk mod n before scaling to keep the angle exact-ish
            const auto m = static_cast<double>((j * k) % n);
            f(j, k) = std::polar(inv_sqrt, 2.0 * std::numbers::pi * m / static_cast<double>(n));
        }
    Matrix y = f * x * f.adjoint();
    make_exactly_hermitian(y);
    return TorusModel(GeneratorVariant::ClockShift, std::move(x), std::move(y));
}

TorusModel TorusModel::custom(Matrix x, Matrix y) {
    require_same_dim(x, y, "custom model");
    if (x.n() < 2) throw InvalidInput("build_model: n must be at least 2");
    require_hermitian(x, "custom generator X");
    require_hermitian(y, "custom generator Y");
    make_exactly_hermitian(x);
    make_exactly_hermitian(y);
    TorusModel m(GeneratorVariant::Custom, std::move(x), std::move(y));
    m.eigenbasis();  // surfaces DegenerateModelError now
    return m;
}

TorusModel build_model(std::size_t n, GeneratorVariant variant) {
    if (variant != GeneratorVariant::ClockShift)
        throw InvalidInput("build_model: the custom variant needs generator matrices");
    return TorusModel::clock_shift(n);
}

const EigenBasis& TorusModel::eigenbasis() const {
    std::call_once(cache_->once, [this] { cache_->basis = compute_eigenbasis(*this); });
    return *cache_->basis;
}

bool TorusModel::has_eigenbasis() const { return cache_->basis.has_value(); }

Matrix delta1(const TorusModel& m, const Matrix& a) {
    require_same_dim(m.y(), a, "delta1");
    return commutator(m.y(), a);
}

Matrix delta2(const TorusModel& m, const Matrix& a) {
    require_same_dim(m.x(), a, "delta2");
    return -commutator(m.x(), a);
}

Matrix laplacian_apply(const TorusModel& m, const Matrix& a) {
    require_same_dim(m.x(), a, "laplacian_apply");
    return commutator(m.y(), commutator(m.y(), a)) + commutator(m.x(), commutator(m.x(), a));
}

Matrix laplacian_superoperator(const TorusModel& m) {
    const Matrix l1 = commutator_superoperator(m.y());
    const Matrix l2 = -commutator_superoperator(m.x());
    const std::size_t big = l1.n();
    Matrix g1(big), g2(big);
    kernels::gemm_adjoint_left(big, big, big, l1.data(), l1.data(), g1.data());
    kernels::gemm_adjoint_left(big, big, big, l2.data(), l2.data(), g2.data());
    Matrix l = g1 + g2;
    make_exactly_hermitian(l);
    return l;
}

EigenBasis compute_eigenbasis(const TorusModel& m) {
    const std::size_t n = m.n();
    EigDecomposition eig = hermitian_eig(laplacian_superoperator(m));
    EigenBasis basis;
    basis.eigenvalues = std::move(eig.eigenvalues);
    const double kernel_tol = 1e-9 * std::max(1.0, basis.eigenvalues.back());
    std::size_t kernel_dim = 0;
    for (double x : basis.eigenvalues)
        if (x <= kernel_tol) ++kernel_dim;
    if (kernel_dim != 1) {
        std::ostringstream msg;
        msg << "degenerate model: Laplacian kernel has dimension " << kernel_dim
            << " (the generators' joint commutant is larger than the scalars)";
        throw DegenerateModelError(msg.str());
    }
    basis.gap = basis.eigenvalues[1];
    basis.columns = std::move(eig.eigenvectors);
    const std::size_t big = n * n;
    basis.eigenmatrices.reserve(big);
    for (std::size_t c = 0; c < big; ++c)
        basis.eigenmatrices.push_back(
            Matrix::from_vec(n, basis.columns.data().subspan(c * big, big)));
    return basis;
}

double dirichlet_energy(const TorusModel& m, const Matrix& c) {
    return hs_norm_sq(delta1(m, c)) + hs_norm_sq(delta2(m, c));
}

double rayleigh(const TorusModel& m, const Matrix& c) {
    const double mass = hs_norm_sq(c);
    if (mass <= 1e-14) throw InvalidInput("rayleigh: matrix is too close to zero");
    return dirichlet_energy(m, c) / mass;
}

SpectralCoefficients decompose(const TorusModel& m, const Matrix& a) {
    require_same_dim(m.x(), a, "decompose");
    const EigenBasis& basis = m.eigenbasis();
    const std::size_t big = basis.size();
    SpectralCoefficients out;
    out.coeffs.resize(big);
    kernels::gemm_adjoint_left(big, big, 1, basis.columns.data(), a.data(), out.coeffs);
    return out;
}

Matrix reconstruct(const TorusModel& m, const SpectralCoefficients& c) {
    const EigenBasis& basis = m.eigenbasis();
    const std::size_t big = basis.size();
    if (c.coeffs.size() != big) throw InvalidInput("reconstruct: coefficient count does not match n^2");
    Matrix a(m.n());
    kernels::gemm(big, big, 1, basis.columns.data(), c.coeffs, a.data());
    return a;
}

} // namespace matflow
