#include "matflow/convexity.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "matflow/errors.hpp"
#include "matflow/flows.hpp"
#include "matflow/linalg.hpp"
#include "matflow/matrix_io.hpp"
#include "matflow/random.hpp"
#include "parallel_for.hpp"

namespace matflow {

namespace {

constexpr double kViolation = -1e-9;
constexpr double kPositive = 1e-10;

double parse_shift(std::string_view text, std::string_view spec) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size())
        throw InvalidInput("bad function spec '" + std::string(spec) + "'");
    return v;
}

void require_shift(double shift, const char* what) {
    if (!(shift > 0.0)) throw InvalidInput(std::string(what) + ": shift must be positive");
}

} // namespace

ScalarFunction ScalarFunction::identity() { return {}; }

ScalarFunction ScalarFunction::square() {
    ScalarFunction f;
    f.tag_ = FunctionTag::Square;
    return f;
}

ScalarFunction ScalarFunction::cube() {
    ScalarFunction f;
    f.tag_ = FunctionTag::Cube;
    return f;
}

ScalarFunction ScalarFunction::resolvent(double shift) {
    require_shift(shift, "resolvent");
    ScalarFunction f;
    f.tag_ = FunctionTag::Resolvent;
    f.shift_ = shift;
    return f;
}

ScalarFunction ScalarFunction::loewner_integrand(double shift) {
    require_shift(shift, "loewner_integrand");
    ScalarFunction f;
    f.tag_ = FunctionTag::LoewnerIntegrand;
    f.shift_ = shift;
    return f;
}

ScalarFunction ScalarFunction::custom_sampled(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() < 2 || xs.size() != ys.size())
        throw InvalidInput("custom_sampled: need at least two (x, y) samples of equal count");
    for (std::size_t i = 1; i < xs.size(); ++i)
        if (!(xs[i] > xs[i - 1])) throw InvalidInput("custom_sampled: x samples must increase strictly");
    ScalarFunction f;
    f.tag_ = FunctionTag::CustomSampled;
    f.xs_ = std::move(xs);
    f.ys_ = std::move(ys);
    return f;
}

ScalarFunction ScalarFunction::parse(std::string_view spec) {
    if (spec == "identity") return identity();
    if (spec == "square") return square();
    if (spec == "cube") return cube();
    const auto colon = spec.find(':');
    if (colon != std::string_view::npos) {
        const auto head = spec.substr(0, colon);
        const double shift = parse_shift(spec.substr(colon + 1), spec);
        if (head == "resolvent") return resolvent(shift);
        if (head == "loewner") return loewner_integrand(shift);
    }
    throw InvalidInput("unknown function '" + std::string(spec) +
                       "' (expected identity|square|cube|resolvent:<s>|loewner:<s>)");
}

std::string ScalarFunction::name() const {
    switch (tag_) {
    case FunctionTag::Identity: return "identity";
    case FunctionTag::Square: return "square";
    case FunctionTag::Cube: return "cube";
    case FunctionTag::Resolvent: return "resolvent:" + format_double(shift_);
    case FunctionTag::LoewnerIntegrand: return "loewner:" + format_double(shift_);
    case FunctionTag::CustomSampled: return "custom-sampled";
    }
    return "?";
}

bool ScalarFunction::defined_at(double x) const {
    switch (tag_) {
    case FunctionTag::Resolvent:
    case FunctionTag::LoewnerIntegrand: return x > -shift_;
    case FunctionTag::CustomSampled: return x >= xs_.front() && x <= xs_.back();
    default: return std::isfinite(x);
    }
}

bool ScalarFunction::samples_psd() const { return tag_ != FunctionTag::Identity && tag_ != FunctionTag::Square; }

double ScalarFunction::operator()(double x) const {
    if (!defined_at(x)) return std::numeric_limits<double>::quiet_NaN();
    switch (tag_) {
    case FunctionTag::Identity: return x;
    case FunctionTag::Square: return x * x;
    case FunctionTag::Cube: return x * x * x;
    case FunctionTag::Resolvent: return shift_ / (x + shift_);
    case FunctionTag::LoewnerIntegrand: return x / (1.0 + shift_) - 1.0 + shift_ / (x + shift_);
    case FunctionTag::CustomSampled: {
        const auto it = std::upper_bound(xs_.begin(), xs_.end(), x);
        const std::size_t hi = std::min<std::size_t>(static_cast<std::size_t>(it - xs_.begin()), xs_.size() - 1);
        const std::size_t lo = hi - 1;
        const double w = (x - xs_[lo]) / (xs_[hi] - xs_[lo]);
        return (1.0 - w) * ys_[lo] + w * ys_[hi];
    }
    }
    return std::numeric_limits<double>::quiet_NaN();
}

Matrix apply_function(const ScalarFunction& f, const Matrix& h) {
    require_hermitian(h, "apply_function");
    return matrix_function(h, [&f](double x) { return f(x); });
}

Matrix convexity_gap(const ScalarFunction& f, const Matrix& a, const Matrix& b, double mu) {
    require_same_dim(a, b, "convexity_gap");
    require_hermitian(a, "convexity_gap (A)");
    require_hermitian(b, "convexity_gap (B)");
    if (!(mu > 0.0 && mu < 1.0)) throw InvalidInput("convexity_gap: mu must lie in (0, 1)");
    Matrix mix = mu * a + (1.0 - mu) * b;
    Matrix gap = mu * apply_function(f, a);
    gap += (1.0 - mu) * apply_function(f, b);
    gap -= apply_function(f, mix);
    return gap;
}

std::pair<Matrix, Matrix> convexity_trial_pair(const ScalarFunction& f, std::size_t dim, std::uint64_t trial_seed) {
    Rng rng(trial_seed);
    if (f.samples_psd()) {
        Matrix a = random_psd(dim, rng);
        Matrix b = random_psd(dim, rng);
        return {std::move(a), std::move(b)};
    }
    Matrix a = random_hermitian(dim, rng);
    Matrix b = random_hermitian(dim, rng);
    return {std::move(a), std::move(b)};
}

ConvexityVerdict is_operator_convex_sampled(const ScalarFunction& f, std::size_t dim, std::size_t trials,
                                            std::uint64_t seed) {
    if (trials < 1) throw InvalidInput("is_operator_convex_sampled: trials must be at least 1");
    if (dim < 1) throw InvalidInput("is_operator_convex_sampled: dim must be positive");
    struct TrialResult {
        double worst = std::numeric_limits<double>::infinity();
        double worst_mu = 0.0;
    };
    std::vector<TrialResult> results(trials);
    detail::parallel_for(trials, [&](std::size_t k) {
        const auto [a, b] = convexity_trial_pair(f, dim, derive_seed(seed, k));
        for (int step = 1; step <= 9; ++step) {
            const double mu = 0.1 * step;
            const double e = min_eigenvalue(convexity_gap(f, a, b, mu));
            if (e < results[k].worst) {
                results[k].worst = e;
                results[k].worst_mu = mu;
            }
        }
    });

    ConvexityVerdict v;
    v.worst_gap_min_eig = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < trials; ++k) {
        v.worst_gap_min_eig = std::min(v.worst_gap_min_eig, results[k].worst);
        if (!v.witness && results[k].worst < kViolation) {
            const std::uint64_t s = derive_seed(seed, k);
            auto [a, b] = convexity_trial_pair(f, dim, s);
            v.witness = ConvexityWitness{std::move(a), std::move(b), results[k].worst_mu, k, s, results[k].worst};
        }
    }
    v.is_convex_on_samples = !v.witness.has_value();
    return v;
}

nlohmann::json to_json(const ConvexityVerdict& v, const ScalarFunction& f) {
    nlohmann::json j{{"function", f.name()},
                     {"is_convex_on_samples", v.is_convex_on_samples},
                     {"worst_gap_min_eig", v.worst_gap_min_eig}};
    if (v.witness) {
        j["witness"] = {{"a", matrix_to_json(v.witness->a)},
                        {"b", matrix_to_json(v.witness->b)},
                        {"mu", v.witness->mu},
                        {"trial", v.witness->trial},
                        {"trial_seed", v.witness->trial_seed},
                        {"gap_min_eig", v.witness->gap_min_eig}};
    } else {
        j["witness"] = nullptr;
    }
    return j;
}

nlohmann::json to_json(const HeatPositivityReport& r) {
    return nlohmann::json{{"status", r.status},
                          {"function", r.function},
                          {"normalized_flow", r.normalized_flow},
                          {"times", r.times},
                          {"min_eig_f", r.min_eig_f},
                          {"min_eig_state", r.min_eig_state},
                          {"all_positive", r.all_positive}};
}

HeatPositivityReport heat_positivity_experiment(const TorusModel& m, const ScalarFunction& f, const Matrix& a0,
                                                std::span<const double> times, bool normalized_flow) {
    require_same_dim(m.x(), a0, "heat_positivity_experiment");
    require_hermitian(a0, "heat_positivity_experiment");
    HeatPositivityReport r;
    r.function = f.name();
    r.normalized_flow = normalized_flow;
    r.times.assign(times.begin(), times.end());

    const auto spectrum = hermitian_eigenvalues(a0);
    const bool in_domain = std::all_of(spectrum.begin(), spectrum.end(), [&](double x) { return f.defined_at(x); });
    if (!in_domain || min_eigenvalue(apply_function(f, a0)) <= kPositive) {
        r.status = "refused";
        return r;
    }

    const auto states = normalized_flow ? normalized_flow_states(m, a0, times) : heat_flow_states(m, a0, times);
    r.min_eig_f.assign(states.size(), std::numeric_limits<double>::quiet_NaN());
    r.min_eig_state.resize(states.size());
    detail::parallel_for(states.size(), [&](std::size_t j) {
        const auto ev = hermitian_eigenvalues(states[j]);
        r.min_eig_state[j] = ev.front();
        if (std::all_of(ev.begin(), ev.end(), [&](double x) { return f.defined_at(x); }))
            r.min_eig_f[j] = min_eigenvalue(apply_function(f, states[j]));
    });
    r.all_positive = std::all_of(r.min_eig_f.begin(), r.min_eig_f.end(), [](double e) { return e > kPositive; });
    return r;
}

double bochner_identity_check(const TorusModel& m, const Matrix& a) {
    require_same_dim(m.x(), a, "bochner_identity_check");
    const Matrix la = laplacian_apply(m, a);
    const Matrix d1 = delta1(m, a);
    const Matrix d2 = delta2(m, a);
    Matrix rhs = la * a + a * la;
    rhs += 2.0 * (d1 * d1 + d2 * d2);
    return hs_norm(laplacian_apply(m, a * a) - rhs);
}

} // namespace matflow
