#include "matflow/flows.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <string>

#include "matflow/errors.hpp"
#include "matflow/kernels.hpp"
#include "matflow/linalg.hpp"
#include "matflow/matrix_io.hpp"
#include "parallel_for.hpp"

namespace matflow {

Solver parse_solver(std::string_view name) {
    if (name == "spectral") return Solver::Spectral;
    if (name == "picard") return Solver::Picard;
    if (name == "rk4") return Solver::Rk4;
    throw InvalidInput("unknown solver '" + std::string(name) + "'");
}

std::string_view solver_name(Solver s) {
    switch (s) {
    case Solver::Spectral: return "spectral";
    case Solver::Picard: return "picard";
    case Solver::Rk4: return "rk4";
    }
    return "?";
}

std::vector<double> uniform_grid(double start, double step, double end) {
    if (!(step > 0.0)) throw InvalidInput("time grid: step must be positive");
    if (end < start) throw InvalidInput("time grid: end precedes start");
    const auto count = static_cast<std::size_t>(std::floor((end - start) / step + 1e-9)) + 1;
    std::vector<double> t(count);
    for (std::size_t j = 0; j < count; ++j) t[j] = start + static_cast<double>(j) * step;
    return t;
}

namespace {

constexpr double kDropCoefficient = 1e-13;

void require_unit_norm(const Matrix& a0, const char* what) {
    const double m = hs_norm_sq(a0);
    if (std::abs(m - 1.0) > 1e-9)
        throw InvalidInput(std::string(what) + ": initial data must have unit HS norm (|a0|^2 = " +
                           format_double(m) + ")");
}

// Coefficients of a0 with round-off level entries set to exact zero.
std::vector<Complex> trimmed_coefficients(const TorusModel& m, const Matrix& a0) {
    auto u = decompose(m, a0).coeffs;
    double norm = 0.0;
    for (const auto& z : u) norm += std::norm(z);
    const double cutoff = kDropCoefficient * std::sqrt(norm);
    for (auto& z : u)
        if (std::abs(z) <= cutoff) z = 0.0;
    return u;
}

// States at the given times, one per column, via one basis-times-weights product.
std::vector<Matrix> evolve_batch(const TorusModel& m, const Matrix& a0, std::span<const double> times,
                                 bool normalized) {
    require_same_dim(m.x(), a0, "flow");
    const EigenBasis& basis = m.eigenbasis();
    const std::size_t big = basis.size();
    std::vector<Complex> u = normalized ? trimmed_coefficients(m, a0) : decompose(m, a0).coeffs;
    double shift = 0.0;
    if (normalized) {
        shift = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < big; ++i)
            if (u[i] != Complex{}) shift = std::min(shift, basis.eigenvalues[i]);
        if (!std::isfinite(shift)) throw InvalidInput("normalized flow: initial data is zero");
    }
    const std::size_t count = times.size();
    std::vector<Complex> weights(big * count);
    for (std::size_t j = 0; j < count; ++j)
        for (std::size_t i = 0; i < big; ++i)
            weights[i + j * big] = u[i] * std::exp(-(basis.eigenvalues[i] - shift) * times[j]);
    std::vector<Complex> vecs(big * count);
    kernels::gemm(big, big, count, basis.columns.data(), weights, vecs);
    std::vector<Matrix> states(count);
    detail::parallel_for(count, [&](std::size_t j) {
        Matrix a = Matrix::from_vec(m.n(), std::span<const Complex>(vecs).subspan(j * big, big));
        if (normalized) a *= 1.0 / hs_norm(a);
        states[j] = std::move(a);
    });
    return states;
}

std::vector<FlowObservation> observe_all(const TorusModel& m, std::span<const double> times,
                                         const std::vector<Matrix>& states) {
    std::vector<FlowObservation> obs(states.size());
    detail::parallel_for(states.size(), [&](std::size_t j) { obs[j] = observe(m, times[j], states[j]); });
    return obs;
}

FlowTrace make_trace(Solver solver, const TorusModel& m, std::span<const double> times, std::vector<Matrix> states,
                     bool keep_states) {
    FlowTrace trace;
    trace.solver = solver;
    trace.observations = observe_all(m, times, states);
    if (keep_states) trace.states = std::move(states);
    return trace;
}

double spectral_rayleigh(std::span<const double> eigenvalues, std::span<const Complex> c) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) {
        const double w = std::norm(c[i]);
        num += eigenvalues[i] * w;
        den += w;
    }
    return num / den;
}

} // namespace

FlowObservation observe(const TorusModel& m, double t, const Matrix& a) {
    FlowObservation o;
    o.t = t;
    o.norm_sq = hs_norm_sq(a);
    o.trace = a.trace();
    o.lambda = rayleigh(m, a);
    Matrix r = laplacian_apply(m, a);
    r -= o.lambda * a;
    o.residual = hs_norm(r);
    if (a.is_hermitian()) {
        const auto ev = hermitian_eigenvalues(a);
        o.min_eig = ev.front();
        if (ev.front() > 0.0) {
            double s = 0.0;
            for (double x : ev) s += std::log(x);
            o.log_det = s;
        }
    }
    return o;
}

Matrix heat_flow_spectral(const TorusModel& m, const Matrix& a0, double t) {
    if (t < 0.0) throw InvalidInput("heat flow: t must be non-negative");
    const double times[] = {t};
    return std::move(evolve_batch(m, a0, times, false).front());
}

Matrix normalized_flow_spectral(const TorusModel& m, const Matrix& a0, double t) {
    if (t < 0.0) throw InvalidInput("normalized flow: t must be non-negative");
    require_unit_norm(a0, "normalized flow");
    const double times[] = {t};
    return std::move(evolve_batch(m, a0, times, true).front());
}

std::vector<Matrix> normalized_flow_states(const TorusModel& m, const Matrix& a0, std::span<const double> times) {
    require_unit_norm(a0, "normalized flow");
    return evolve_batch(m, a0, times, true);
}

std::vector<Matrix> heat_flow_states(const TorusModel& m, const Matrix& a0, std::span<const double> times) {
    return evolve_batch(m, a0, times, false);
}

FlowTrace normalized_flow_trace(const TorusModel& m, const Matrix& a0, std::span<const double> times,
                                TraceOptions opts) {
    require_unit_norm(a0, "normalized flow");
    return make_trace(Solver::Spectral, m, times, evolve_batch(m, a0, times, true), opts.keep_states);
}

FlowTrace heat_flow_trace(const TorusModel& m, const Matrix& a0, std::span<const double> times, TraceOptions opts) {
    return make_trace(Solver::Spectral, m, times, evolve_batch(m, a0, times, false), opts.keep_states);
}

namespace {

// Running integral of samples on a uniform grid. Each panel uses the cubic
// through its four nearest samples (one-sided at the ends), so the error is
// O(h^4); falls back to the trapezoid rule on grids with fewer than 4 points.
void cumulative_integral(std::span<const double> f, double h, std::span<double> out) {
    const std::size_t count = f.size();
    out[0] = 0.0;
    for (std::size_t j = 1; j < count; ++j) {
        double panel = 0.0;
        if (count < 4) {
            panel = 0.5 * h * (f[j - 1] + f[j]);
        } else if (j == 1) {
            panel = h / 24.0 * (9.0 * f[0] + 19.0 * f[1] - 5.0 * f[2] + f[3]);
        } else if (j == count - 1) {
            panel = h / 24.0 * (f[j - 3] - 5.0 * f[j - 2] + 19.0 * f[j - 1] + 9.0 * f[j]);
        } else {
            panel = h / 24.0 * (-f[j - 2] + 13.0 * f[j - 1] + 13.0 * f[j] - f[j + 1]);
        }
        out[j] = out[j - 1] + panel;
    }
}

} // namespace

FlowTrace normalized_flow_picard(const TorusModel& m, const Matrix& a0, const PicardOptions& opts) {
    require_same_dim(m.x(), a0, "picard");
    require_unit_norm(a0, "picard");
    if (!(opts.t_end > 0.0)) throw InvalidInput("picard: t_end must be positive");
    if (!(opts.tol > 0.0)) throw InvalidInput("picard: tol must be positive");
    if (opts.k_max < 1) throw InvalidInput("picard: k_max must be at least 1");

    const EigenBasis& basis = m.eigenbasis();
    const std::size_t big = basis.size();
    const std::vector<double> times = uniform_grid(0.0, opts.step, opts.t_end);
    const std::size_t count = times.size();
    const std::vector<Complex> u = decompose(m, a0).coeffs;

    // heat part exp(-lambda_i t_j) u_i, shared by every iterate
    std::vector<Complex> heat(big * count);
    for (std::size_t j = 0; j < count; ++j)
        for (std::size_t i = 0; i < big; ++i) heat[i + j * big] = u[i] * std::exp(-basis.eigenvalues[i] * times[j]);

    // a_0(t) = a0 for all t, lambda_0(t) = lambda(a0)
    std::vector<Complex> current(big * count);
    for (std::size_t j = 0; j < count; ++j) std::copy(u.begin(), u.end(), current.begin() + j * big);
    std::vector<double> lambda(count, rayleigh(m, a0));

    PicardStatus status;
    std::vector<Complex> next(big * count);
    std::vector<double> integral(count);
    for (int k = 0; k < opts.k_max; ++k) {
        cumulative_integral(lambda, opts.step, integral);
        double sup = 0.0;
        for (std::size_t j = 0; j < count; ++j) {
            const double scale = std::exp(integral[j]);
            double dist = 0.0;
            for (std::size_t i = 0; i < big; ++i) {
                const Complex c = heat[i + j * big] * scale;
                dist += std::norm(c - current[i + j * big]);
                next[i + j * big] = c;
            }
            sup = std::max(sup, std::sqrt(dist));
            lambda[j] = spectral_rayleigh(basis.eigenvalues,
                                          std::span<const Complex>(next).subspan(j * big, big));
        }
        std::swap(current, next);
        status.iterations = k + 1;
        status.iterate_distances.push_back(sup);
        if (sup <= opts.tol) {
            status.converged = true;
            break;
        }
    }

    std::vector<Complex> vecs(big * count);
    kernels::gemm(big, big, count, basis.columns.data(), current, vecs);
    std::vector<Matrix> states(count);
    for (std::size_t j = 0; j < count; ++j)
        states[j] = Matrix::from_vec(m.n(), std::span<const Complex>(vecs).subspan(j * big, big));

    const std::vector<Matrix> oracle = evolve_batch(m, a0, times, true);
    for (std::size_t j = 0; j < count; ++j)
        status.sup_distance_to_spectral = std::max(status.sup_distance_to_spectral, hs_norm(states[j] - oracle[j]));

    FlowTrace trace = make_trace(Solver::Picard, m, times, std::move(states), opts.keep_states);
    trace.picard = std::move(status);
    return trace;
}

FlowTrace normalized_flow_rk4(const TorusModel& m, const Matrix& a0, const Rk4Options& opts) {
    require_same_dim(m.x(), a0, "rk4");
    require_unit_norm(a0, "rk4");
    if (opts.dt < 1e-12) throw InvalidInput("rk4: step underflow (dt < 1e-12)");
    if (opts.dt > opts.t_end) throw InvalidInput("rk4: dt must not exceed t_end");

    const auto rhs = [&m](const Matrix& a) {
        Matrix r = rayleigh(m, a) * a;
        r -= laplacian_apply(m, a);
        return r;
    };
    const auto steps = static_cast<std::size_t>(std::llround(opts.t_end / opts.dt));
    const double h = opts.dt;
    std::vector<double> times(steps + 1);
    std::vector<Matrix> states(steps + 1);
    times[0] = 0.0;
    states[0] = a0;
    Matrix a = a0;
    for (std::size_t s = 1; s <= steps; ++s) {
        const Matrix k1 = rhs(a);
        const Matrix k2 = rhs(a + (0.5 * h) * k1);
        const Matrix k3 = rhs(a + (0.5 * h) * k2);
        const Matrix k4 = rhs(a + h * k3);
        a += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        if (opts.renormalize_each_step) a *= 1.0 / hs_norm(a);
        times[s] = static_cast<double>(s) * h;
        states[s] = a;
    }
    return make_trace(Solver::Rk4, m, times, std::move(states), opts.keep_states);
}

ConvergenceReport detect_convergence(const FlowTrace& trace, const EigenBasis& basis, double tol) {
    const auto& obs = trace.observations;
    if (obs.empty()) throw InvalidInput("detect_convergence: empty trace");
    ConvergenceReport r;
    const FlowObservation& last = obs.back();
    r.lambda_inf = last.lambda;
    r.final_residual = last.residual;

    const std::size_t window = std::max<std::size_t>(1, (obs.size() + 9) / 10);
    double lo = last.lambda, hi = last.lambda;
    for (std::size_t j = obs.size() - window; j < obs.size(); ++j) {
        lo = std::min(lo, obs[j].lambda);
        hi = std::max(hi, obs[j].lambda);
    }
    r.converged = last.residual <= tol && hi - lo <= tol;

    std::size_t best = 0;
    for (std::size_t i = 1; i < basis.size(); ++i)
        if (std::abs(basis.eigenvalues[i] - r.lambda_inf) < std::abs(basis.eigenvalues[best] - r.lambda_inf))
            best = i;
    std::size_t first = best, lastc = best;
    while (first > 0 && basis.eigenvalues[first] - basis.eigenvalues[first - 1] < 1e-9) --first;
    while (lastc + 1 < basis.size() && basis.eigenvalues[lastc + 1] - basis.eigenvalues[lastc] < 1e-9) ++lastc;
    r.matched_eigenvalue_index = first;
    r.matched_cluster_last = lastc;

    std::size_t settle = obs.size();
    while (settle > 0 && obs[settle - 1].residual <= tol) --settle;
    r.t_converged = settle < obs.size() ? obs[settle].t : std::numeric_limits<double>::quiet_NaN();

    const double scale = std::max(1.0, std::sqrt(obs.front().norm_sq));
    r.trace_free_initial = std::abs(obs.front().trace) <= 1e-10 * scale;
    r.above_gap = !r.trace_free_initial || r.lambda_inf >= basis.gap - tol;
    return r;
}

void write_trace_csv(std::ostream& os, const FlowTrace& trace) {
    os << "t,lambda,norm_sq,trace_re,trace_im,min_eig,residual,log_det\n";
    for (const auto& o : trace.observations) {
        os << format_double(o.t) << ',' << format_double(o.lambda) << ',' << format_double(o.norm_sq) << ','
           << format_double(o.trace.real()) << ',' << format_double(o.trace.imag()) << ',';
        if (o.min_eig) os << format_double(*o.min_eig);
        os << ',' << format_double(o.residual) << ',';
        if (o.log_det) os << format_double(*o.log_det);
        os << '\n';
    }
}

} // namespace matflow
