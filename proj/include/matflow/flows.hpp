#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "matflow/matrix.hpp"
#include "matflow/torus.hpp"

namespace matflow {

enum class Solver { Spectral, Picard, Rk4 };

Solver parse_solver(std::string_view name);
std::string_view solver_name(Solver s);

/// Uniform time grid start, start + step, ..., end (end included when it lies
/// on the grid within 1e-9 steps). t_j is computed as start + j * step.
std::vector<double> uniform_grid(double start, double step, double end);

struct FlowObservation {
    double t = 0.0;
    /// Rayleigh quotient lambda(a).
    double lambda = 0.0;
    double norm_sq = 0.0;
    Complex trace;
    /// Hermitian states only.
    std::optional<double> min_eig;
    /// |Delta a - lambda(a) a|_HS, the part of Delta a orthogonal to a.
    double residual = 0.0;
    /// Positive definite states only.
    std::optional<double> log_det;
};

struct ConvergenceReport {
    bool converged = false;
    double lambda_inf = 0.0;
    std::size_t matched_eigenvalue_index = 0;
    /// Last index of the eigenvalue cluster containing the match.
    std::size_t matched_cluster_last = 0;
    double final_residual = 0.0;
    double t_converged = 0.0;
    /// Initial data had zero trace, so the limit must sit at or above lambda_1.
    bool trace_free_initial = false;
    /// lambda_inf >= lambda_1 - tol (always true when trace_free_initial is false).
    bool above_gap = true;
};

struct PicardStatus {
    bool converged = false;
    int iterations = 0;
    /// sup_t |a_{k+1}(t) - a_k(t)| for k = 1, 2, ...
    std::vector<double> iterate_distances;
    double sup_distance_to_spectral = 0.0;
};

struct FlowTrace {
    Solver solver = Solver::Spectral;
    std::vector<FlowObservation> observations;
    /// Only filled when requested.
    std::vector<Matrix> states;
    std::optional<ConvergenceReport> convergence;
    std::optional<PicardStatus> picard;
};

FlowObservation observe(const TorusModel& m, double t, const Matrix& a);

/// Solution sum_i u_i(0) exp(-lambda_i t) phi_i of b_t = -Delta b.
Matrix heat_flow_spectral(const TorusModel& m, const Matrix& a0, double t);

/// Norm-preserving flow a_t = -Delta a + lambda(a) a, evaluated as the heat
/// solution rescaled to unit HS norm. Requires |a0|^2 = 1 within 1e-9.
///
/// Coefficients below 1e-13 * |a0| are treated as exact zeros, so round-off
/// in a mode the initial data does not contain cannot take over at large t.
Matrix normalized_flow_spectral(const TorusModel& m, const Matrix& a0, double t);

/// Normalized-flow states at each time (one batched reconstruction).
std::vector<Matrix> normalized_flow_states(const TorusModel& m, const Matrix& a0, std::span<const double> times);
/// Heat-flow states at each time.
std::vector<Matrix> heat_flow_states(const TorusModel& m, const Matrix& a0, std::span<const double> times);

struct TraceOptions {
    bool keep_states = false;
};

/// Observations of the spectral normalized flow on the given times.
FlowTrace normalized_flow_trace(const TorusModel& m, const Matrix& a0, std::span<const double> times,
                                TraceOptions opts = {});
/// Observations of the (unnormalized) heat flow on the given times.
FlowTrace heat_flow_trace(const TorusModel& m, const Matrix& a0, std::span<const double> times,
                          TraceOptions opts = {});

struct PicardOptions {
    double t_end = 1.0;
    int k_max = 50;
    double tol = 1e-10;
    double step = 1e-3;
    bool keep_states = false;
};

/// Fixed-point construction of the norm-preserving flow: lambda_0 is the
/// constant Rayleigh quotient of a0; for k >= 0 the linear problem
/// a_t = -Delta a + lambda_k(t) a is solved exactly in the eigenbasis,
/// a_{k+1}(t) = sum_i u_i(0) exp(-lambda_i t + int_0^t lambda_k) phi_i, with the
/// integral by the trapezoid rule on a uniform grid, and lambda_{k+1} is the
/// Rayleigh quotient of a_{k+1}. Stops when successive iterates are within tol
/// in sup-norm over the grid; a non-converged run is reported in the status,
/// not thrown.
FlowTrace normalized_flow_picard(const TorusModel& m, const Matrix& a0, const PicardOptions& opts);

struct Rk4Options {
    double dt = 1e-3;
    double t_end = 1.0;
    bool renormalize_each_step = false;
    bool keep_states = false;
};

/// Classical RK4 on a_t = -Delta a + lambda(a) a, observed after every step.
FlowTrace normalized_flow_rk4(const TorusModel& m, const Matrix& a0, const Rk4Options& opts);

/// Limit detection: converged when the final residual is <= tol and lambda
/// varies by at most tol over the last 10% of the samples. The limit is
/// matched to the closest Laplacian eigenvalue and its cluster.
ConvergenceReport detect_convergence(const FlowTrace& trace, const EigenBasis& basis, double tol = 1e-8);

/// CSV with header t,lambda,norm_sq,trace_re,trace_im,min_eig,residual,log_det;
/// undefined cells are empty, numbers use 17 significant digits.
void write_trace_csv(std::ostream& os, const FlowTrace& trace);

} // namespace matflow
