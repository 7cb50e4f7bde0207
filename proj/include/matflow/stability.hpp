#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <json.hpp>

#include "matflow/matrix.hpp"
#include "matflow/torus.hpp"

namespace matflow {

/// -tau(u log u) over the eigenvalues of a Hermitian positive definite u
/// (natural log). No 0 log 0 regularization: throws DomainError otherwise.
double von_neumann_entropy(const Matrix& u);

/// -s log s with eta(0) = 0; throws InvalidInput outside [0, 1].
double eta(double s);

/// Trace norm of u - v for Hermitian u, v.
double trace_distance(const Matrix& u, const Matrix& v);

struct FannesCheck {
    /// Omega = T(u, v).
    double omega = 0.0;
    double bound = 0.0;
    double entropy_gap = 0.0;
    /// Omega <= 1/e; outside it the bound is not asserted.
    bool in_regime = false;
    bool holds = false;
};

/// Omega log d + eta(Omega) with Omega = trace_distance(u, v).
double fannes_bound(const Matrix& u, const Matrix& v, std::size_t d);
/// Evaluates both sides; holds = gap <= bound + 1e-10 when in regime.
FannesCheck fannes_check(const Matrix& u, const Matrix& v, std::size_t d);

struct StabilityReport {
    std::string status = "ok";
    std::vector<double> times;
    std::vector<double> hs_dist_sq;
    /// NaN where a state is not Hermitian.
    std::vector<double> trace_dist;
    /// NaN where a state is not positive definite.
    std::vector<double> entropy_gap;
    /// Pointwise Fannes bound T(t) log d + eta(T(t)); NaN out of regime.
    std::vector<double> fannes_rhs;
    /// max over the grid of the discrete log-derivative of |u - v|^2, floored at 0.
    double estimated_C1 = 0.0;
    /// max_t T(t) / T(0), the multiplicative constant of the entropy bound.
    double trace_growth_factor = 1.0;
    /// C T(0) log d + eta(C T(0)) with C = trace_growth_factor; NaN out of regime.
    double theorem_rhs = 0.0;
    std::size_t fannes_d = 0;
    bool all_bounds_hold = false;
};

nlohmann::json to_json(const StabilityReport& r);

struct StabilityOptions {
    double t_end = 1.0;
    double step = 1e-2;
    /// Fannes dimension; 0 means n.
    std::size_t fannes_d = 0;
};

/// Evolves u0, v0 by the spectral normalized flow and certifies
/// |u-v|^2(t) <= exp(C1 t) |u-v|^2(0) (1 + 1e-8) with the estimated C1.
/// Throws InvalidInput for unnormalized or identical initial data.
StabilityReport hs_stability_experiment(const TorusModel& m, const Matrix& u0, const Matrix& v0,
                                        const StabilityOptions& opts);

/// Entropy stability: for positive definite u0, v0 with T(u0, v0) <= 1/e,
/// checks |S(u_t) - S(v_t)| <= C T(0) log d + eta(C T(0)) pointwise, with C the
/// observed trace-distance growth factor. Hypothesis violations give status
/// "out-of-regime" with the raw curves still recorded.
StabilityReport entropy_stability_experiment(const TorusModel& m, const Matrix& u0, const Matrix& v0,
                                             const StabilityOptions& opts);

} // namespace matflow
