#include "matflow/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "matflow/errors.hpp"
#include "matflow/kernels.hpp"

namespace matflow {

namespace {

constexpr double kOffDiagTol = 1e-13;
constexpr int kMaxSweeps = 50;
constexpr double kClusterGap = 1e-9;

double off_diagonal_norm(const Matrix& a) {
    double s = 0.0;
    for (std::size_t k = 0; k < a.n(); ++k)
        for (std::size_t j = 0; j < a.n(); ++j)
            if (j != k) s += std::norm(a(j, k));
    return std::sqrt(s);
}

void jacobi_diagonalize(Matrix& a, Matrix& v) {
    const std::size_t n = a.n();
    const double threshold = kOffDiagTol * std::max(1.0, hs_norm(a));
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        if (off_diagonal_norm(a) <= threshold) return;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const Complex apq = a(p, q);
                const double mag = std::abs(apq);
                if (mag == 0.0) continue;
                const double app = a(p, p).real();
                const double aqq = a(q, q).real();
                const double theta = (aqq - app) / (2.0 * mag);
                double t;
                if (std::abs(theta) > 1e150) {
                    t = 0.5 / theta;
                } else {
                    t = (theta >= 0.0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                }
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                const Complex d = std::conj(apq) / mag;
                kernels::jacobi_rotate(n, a.data(), v.data(), {p, q, c, s, d});
                a(p, q) = 0.0;
                a(q, p) = 0.0;
                a(p, p) = app - t * mag;
                a(q, q) = aqq + t * mag;
            }
        }
    }
}

// Column k of v as a vector view helper.
Complex* column(Matrix& v, std::size_t k) { return v.data().data() + k * v.n(); }

void fix_phase(Complex* col, std::size_t n) {
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, std::abs(col[i]));
    if (mx == 0.0) return;
    for (std::size_t i = 0; i < n; ++i) {
        const double mag = std::abs(col[i]);
        if (mag > 1e-8 * mx) {
            const Complex phase = std::conj(col[i]) / mag;
            for (std::size_t r = 0; r < n; ++r) col[r] *= phase;
            col[i] = mag;
            return;
        }
    }
}

std::size_t dominant_index(const Complex* col, std::size_t n) {
    double mx = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx = std::max(mx, std::abs(col[i]));
    for (std::size_t i = 0; i < n; ++i)
        if (std::abs(col[i]) >= mx * (1.0 - 1e-9)) return i;
    return 0;
}

// Replace the cluster's vectors by Gram-Schmidt on P e_0, P e_1, ... where P
// projects onto the cluster subspace. Returns false if the subspace could not
// be re-spanned, in which case v is left untouched.
bool respan_cluster(Matrix& v, std::size_t first, std::size_t last) {
    const std::size_t n = v.n();
    const std::size_t m = last - first;
    std::vector<std::vector<Complex>> basis;
    basis.reserve(m);
    std::vector<Complex> w(n);
    for (std::size_t k = 0; k < n && basis.size() < m; ++k) {
        std::fill(w.begin(), w.end(), Complex{});
        for (std::size_t c = first; c < last; ++c) {
            const Complex* q = column(v, c);
            const Complex coef = std::conj(q[k]);
            for (std::size_t i = 0; i < n; ++i) w[i] += q[i] * coef;
        }
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& b : basis) {
                Complex proj = 0.0;
                for (std::size_t i = 0; i < n; ++i) proj += std::conj(b[i]) * w[i];
                for (std::size_t i = 0; i < n; ++i) w[i] -= proj * b[i];
            }
        }
        double norm = 0.0;
        for (const auto& z : w) norm += std::norm(z);
        norm = std::sqrt(norm);
        if (norm > 1e-6) {
            for (auto& z : w) z /= norm;
            basis.push_back(w);
        }
    }
    if (basis.size() != m) return false;
    for (std::size_t c = 0; c < m; ++c) std::copy(basis[c].begin(), basis[c].end(), column(v, first + c));
    return true;
}

void canonicalize(std::vector<double>& vals, Matrix& v) {
    const std::size_t n = v.n();
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i + 1;
        while (j < n && vals[j] - vals[j - 1] < kClusterGap) ++j;
        if (j - i > 1) respan_cluster(v, i, j);
        for (std::size_t c = i; c < j; ++c) fix_phase(column(v, c), n);
        if (j - i > 1) {
            std::vector<std::size_t> order(j - i);
            std::iota(order.begin(), order.end(), i);
            std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
                return dominant_index(column(v, x), n) < dominant_index(column(v, y), n);
            });
            Matrix copy = v;
            for (std::size_t c = 0; c < order.size(); ++c)
                std::copy(column(copy, order[c]), column(copy, order[c]) + n, column(v, i + c));
        }
        i = j;
    }
}

} // namespace

Matrix EigDecomposition::reconstruct() const {
    return matrix_function_complex(*this, [](double x) { return Complex(x, 0.0); });
}

EigDecomposition hermitian_eig(const Matrix& h) {
    require_hermitian(h, "hermitian_eig");
    const std::size_t n = h.n();
    Matrix a = h;
    for (std::size_t k = 0; k < n; ++k) {
        a(k, k) = a(k, k).real();
        for (std::size_t j = 0; j < k; ++j) a(k, j) = std::conj(a(j, k));
    }
    Matrix v = Matrix::identity(n);
    jacobi_diagonalize(a, v);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t x, std::size_t y) { return a(x, x).real() < a(y, y).real(); });
    EigDecomposition out;
    out.eigenvalues.resize(n);
    out.eigenvectors = Matrix(n);
    for (std::size_t c = 0; c < n; ++c) {
        out.eigenvalues[c] = a(order[c], order[c]).real();
        for (std::size_t r = 0; r < n; ++r) out.eigenvectors(r, c) = v(r, order[c]);
    }
    canonicalize(out.eigenvalues, out.eigenvectors);
    return out;
}

std::vector<double> hermitian_eigenvalues(const Matrix& h) { return hermitian_eig(h).eigenvalues; }

Matrix matrix_function_complex(const EigDecomposition& eig, const std::function<Complex(double)>& f) {
    const std::size_t n = eig.eigenvectors.n();
    Matrix scaled = eig.eigenvectors;
    for (std::size_t c = 0; c < n; ++c) {
        const Complex fc = f(eig.eigenvalues[c]);
        if (!std::isfinite(fc.real()) || !std::isfinite(fc.imag())) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "matrix function undefined at eigenvalue " << eig.eigenvalues[c];
            throw DomainError(msg.str());
        }
        for (std::size_t r = 0; r < n; ++r) scaled(r, c) *= fc;
    }
    const Matrix vh = eig.eigenvectors.adjoint();
    Matrix out(n);
    kernels::gemm(n, n, n, scaled.data(), vh.data(), out.data());
    return out;
}

Matrix matrix_function(const EigDecomposition& eig, const std::function<double(double)>& f) {
    Matrix r = matrix_function_complex(eig, [&](double x) { return Complex(f(x), 0.0); });
    const std::size_t n = r.n();
    for (std::size_t k = 0; k < n; ++k) {
        r(k, k) = r(k, k).real();
        for (std::size_t j = 0; j < k; ++j) {
            const Complex avg = 0.5 * (r(j, k) + std::conj(r(k, j)));
            r(j, k) = avg;
            r(k, j) = std::conj(avg);
        }
    }
    return r;
}

Matrix matrix_function(const Matrix& h, const std::function<double(double)>& f) {
    return matrix_function(hermitian_eig(h), f);
}

double trace_norm(const Matrix& a) {
    require_hermitian(a, "trace_norm");
    double s = 0.0;
    for (double x : hermitian_eigenvalues(a)) s += std::abs(x);
    return s;
}

double schatten1_norm(const Matrix& a) {
    if (a.is_hermitian()) return trace_norm(a);
    Matrix g = a.adjoint() * a;
    double s = 0.0;
    for (double x : hermitian_eigenvalues(g)) s += std::sqrt(std::max(0.0, x));
    return s;
}

double min_eigenvalue(const Matrix& h) {
    require_hermitian(h, "min_eigenvalue");
    if (h.n() == 0) throw InvalidInput("min_eigenvalue: empty matrix");
    return hermitian_eigenvalues(h).front();
}

} // namespace matflow
