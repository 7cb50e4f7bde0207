#include "matflow/stability.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "matflow/errors.hpp"
#include "matflow/flows.hpp"
#include "matflow/linalg.hpp"
#include "matflow/matrix_io.hpp"

namespace matflow {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
const double kInvE = 1.0 / std::numbers::e;

bool positive_definite(const Matrix& a) { return a.is_hermitian() && min_eigenvalue(a) > 0.0; }

double pointwise_fannes(double omega, std::size_t d) {
    if (!(omega <= kInvE)) return kNaN;
    return omega * std::log(static_cast<double>(d)) + eta(omega);
}

void require_unit(const Matrix& a, const char* what) {
    if (std::abs(hs_norm_sq(a) - 1.0) > 1e-9)
        throw InvalidInput(std::string(what) + ": initial data must have unit HS norm");
}

// Shared part of both experiments: evolve, then record distances and entropies.
StabilityReport evolve_pair(const TorusModel& m, const Matrix& u0, const Matrix& v0, const StabilityOptions& opts) {
    require_same_dim(u0, v0, "stability experiment");
    require_unit(u0, "stability experiment (u0)");
    require_unit(v0, "stability experiment (v0)");
    StabilityReport r;
    r.fannes_d = opts.fannes_d == 0 ? m.n() : opts.fannes_d;
    r.times = uniform_grid(0.0, opts.step, opts.t_end);
    const auto us = normalized_flow_states(m, u0, r.times);
    const auto vs = normalized_flow_states(m, v0, r.times);
    const std::size_t count = r.times.size();
    r.hs_dist_sq.resize(count);
    r.trace_dist.assign(count, kNaN);
    r.entropy_gap.assign(count, kNaN);
    r.fannes_rhs.assign(count, kNaN);
    for (std::size_t j = 0; j < count; ++j) {
        const Matrix diff = us[j] - vs[j];
        r.hs_dist_sq[j] = hs_norm_sq(diff);
        if (diff.is_hermitian()) r.trace_dist[j] = trace_norm(diff);
        if (positive_definite(us[j]) && positive_definite(vs[j])) {
            r.entropy_gap[j] = std::abs(von_neumann_entropy(us[j]) - von_neumann_entropy(vs[j]));
            r.fannes_rhs[j] = pointwise_fannes(r.trace_dist[j], r.fannes_d);
        }
    }

    double c1 = 0.0;
    for (std::size_t j = 0; j + 1 < count; ++j) {
        const double a = r.hs_dist_sq[j], b = r.hs_dist_sq[j + 1];
        if (a > 0.0 && b > 0.0) c1 = std::max(c1, (std::log(b) - std::log(a)) / (r.times[j + 1] - r.times[j]));
    }
    r.estimated_C1 = c1;

    if (r.trace_dist[0] > 0.0) {
        double growth = 1.0;
        for (double t : r.trace_dist)
            if (!std::isnan(t)) growth = std::max(growth, t / r.trace_dist[0]);
        r.trace_growth_factor = growth;
    }
    return r;
}

bool hs_bound_holds(const StabilityReport& r) {
    for (std::size_t j = 0; j < r.times.size(); ++j)
        if (r.hs_dist_sq[j] > std::exp(r.estimated_C1 * r.times[j]) * r.hs_dist_sq[0] * (1.0 + 1e-8)) return false;
    return true;
}

bool fannes_holds_where_defined(const StabilityReport& r) {
    for (std::size_t j = 0; j < r.times.size(); ++j)
        if (!std::isnan(r.fannes_rhs[j]) && r.entropy_gap[j] > r.fannes_rhs[j] + 1e-10) return false;
    return true;
}

} // namespace

double von_neumann_entropy(const Matrix& u) {
    require_hermitian(u, "von_neumann_entropy");
    const auto ev = hermitian_eigenvalues(u);
    double s = 0.0;
    for (double x : ev) {
        if (!(x > 0.0)) {
            std::ostringstream msg;
            msg.precision(17);
            msg << "von_neumann_entropy: state is not positive definite (eigenvalue " << x << ")";
            throw DomainError(msg.str());
        }
        s -= x * std::log(x);
    }
    return s;
}

double eta(double s) {
    if (!(s >= 0.0 && s <= 1.0)) throw InvalidInput("eta: argument must lie in [0, 1], got " + format_double(s));
    if (s == 0.0) return 0.0;
    return -s * std::log(s);
}

double trace_distance(const Matrix& u, const Matrix& v) {
    require_same_dim(u, v, "trace_distance");
    require_hermitian(u, "trace_distance");
    require_hermitian(v, "trace_distance");
    return trace_norm(u - v);
}

double fannes_bound(const Matrix& u, const Matrix& v, std::size_t d) {
    if (d < 1) throw InvalidInput("fannes_bound: d must be positive");
    return pointwise_fannes(trace_distance(u, v), d);
}

FannesCheck fannes_check(const Matrix& u, const Matrix& v, std::size_t d) {
    FannesCheck c;
    c.omega = trace_distance(u, v);
    c.bound = fannes_bound(u, v, d);
    c.entropy_gap = std::abs(von_neumann_entropy(u) - von_neumann_entropy(v));
    c.in_regime = c.omega <= kInvE;
    c.holds = c.in_regime && c.entropy_gap <= c.bound + 1e-10;
    return c;
}

nlohmann::json to_json(const StabilityReport& r) {
    return nlohmann::json{{"status", r.status},
                          {"times", r.times},
                          {"hs_dist_sq", r.hs_dist_sq},
                          {"trace_dist", r.trace_dist},
                          {"entropy_gap", r.entropy_gap},
                          {"fannes_rhs", r.fannes_rhs},
                          {"estimated_C1", r.estimated_C1},
                          {"trace_growth_factor", r.trace_growth_factor},
                          {"theorem_rhs", r.theorem_rhs},
                          {"fannes_d", r.fannes_d},
                          {"all_bounds_hold", r.all_bounds_hold}};
}

StabilityReport hs_stability_experiment(const TorusModel& m, const Matrix& u0, const Matrix& v0,
                                        const StabilityOptions& opts) {
    require_same_dim(u0, v0, "hs_stability_experiment");
    if (hs_norm(u0 - v0) <= 1e-14) throw InvalidInput("hs_stability_experiment: initial data are identical");
    StabilityReport r = evolve_pair(m, u0, v0, opts);
    r.theorem_rhs = kNaN;
    r.all_bounds_hold = hs_bound_holds(r) && fannes_holds_where_defined(r);
    return r;
}

StabilityReport entropy_stability_experiment(const TorusModel& m, const Matrix& u0, const Matrix& v0,
                                             const StabilityOptions& opts) {
    StabilityReport r = evolve_pair(m, u0, v0, opts);
    const bool pd = positive_definite(u0) && positive_definite(v0);
    const double t0 = r.trace_dist[0];
    bool in_regime = pd && t0 <= kInvE;
    for (double g : r.entropy_gap)
        if (std::isnan(g)) in_regime = false;
    const double scaled = r.trace_growth_factor * t0;
    if (!in_regime || !(scaled <= kInvE)) {
        r.status = "out-of-regime";
        r.theorem_rhs = kNaN;
        r.all_bounds_hold = false;
        return r;
    }
    r.theorem_rhs = scaled * std::log(static_cast<double>(r.fannes_d)) + eta(scaled);
    bool ok = fannes_holds_where_defined(r);
    for (double g : r.entropy_gap)
        if (g > r.theorem_rhs + 1e-10) ok = false;
    if (t0 > 0.0) ok = ok && hs_bound_holds(r);
    r.all_bounds_hold = ok;
    return r;
}

} // namespace matflow
