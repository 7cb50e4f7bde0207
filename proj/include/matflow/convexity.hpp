#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "matflow/matrix.hpp"
#include "matflow/torus.hpp"

namespace matflow {

enum class FunctionTag { Identity, Square, Resolvent, LoewnerIntegrand, Cube, CustomSampled };

/// Real function applied through spectral calculus.
class ScalarFunction {
public:
    static ScalarFunction identity();
    static ScalarFunction square();
    static ScalarFunction cube();
    /// x -> shift / (x + shift), defined for x > -shift.
    static ScalarFunction resolvent(double shift);
    /// x -> x/(1 + shift) - 1 + shift/(x + shift), defined for x > -shift.
    static ScalarFunction loewner_integrand(double shift);
    /// Piecewise-linear interpolation through (xs, ys), xs strictly increasing;
    /// defined on [xs.front(), xs.back()].
    static ScalarFunction custom_sampled(std::vector<double> xs, std::vector<double> ys);

    /// identity | square | cube | resolvent:<shift> | loewner:<shift>
    static ScalarFunction parse(std::string_view spec);

    FunctionTag tag() const { return tag_; }
    double shift() const { return shift_; }
    std::string name() const;

    double operator()(double x) const;
    /// True if x lies in the function's domain.
    bool defined_at(double x) const;
    /// Sampling distribution for the convexity checker: PSD pairs for
    /// functions considered on [0, inf), general Hermitian otherwise.
    bool samples_psd() const;

private:
    FunctionTag tag_ = FunctionTag::Identity;
    double shift_ = 0.0;
    std::vector<double> xs_, ys_;
};

/// f applied to a Hermitian matrix; throws DomainError if an eigenvalue lies
/// outside the domain.
Matrix apply_function(const ScalarFunction& f, const Matrix& h);

/// mu f(A) + (1 - mu) f(B) - f(mu A + (1 - mu) B).
Matrix convexity_gap(const ScalarFunction& f, const Matrix& a, const Matrix& b, double mu);

struct ConvexityWitness {
    Matrix a;
    Matrix b;
    double mu = 0.0;
    std::uint64_t trial = 0;
    std::uint64_t trial_seed = 0;
    double gap_min_eig = 0.0;
};

struct ConvexityVerdict {
    bool is_convex_on_samples = true;
    double worst_gap_min_eig = 0.0;
    std::optional<ConvexityWitness> witness;
};

nlohmann::json to_json(const ConvexityVerdict& v, const ScalarFunction& f);

/// Regenerates the (A, B) pair of one sampler trial.
std::pair<Matrix, Matrix> convexity_trial_pair(const ScalarFunction& f, std::size_t dim, std::uint64_t trial_seed);

/// Random search for a violation of operator convexity. Trial k draws (A, B)
/// from an Rng seeded with derive_seed(seed, k) and tests mu = 0.1, ..., 0.9.
/// Any gap with min eigenvalue below -1e-9 is a violation; the witness is the
/// one with the lowest trial index. Deterministic for a given seed.
ConvexityVerdict is_operator_convex_sampled(const ScalarFunction& f, std::size_t dim, std::size_t trials,
                                            std::uint64_t seed);

struct HeatPositivityReport {
    /// "ok" or "refused" (f(a0) not positive definite).
    std::string status = "ok";
    std::string function;
    bool normalized_flow = false;
    std::vector<double> times;
    std::vector<double> min_eig_f;
    std::vector<double> min_eig_state;
    bool all_positive = false;
};

nlohmann::json to_json(const HeatPositivityReport& r);

/// Evolves a0 by the heat flow (or, when normalized_flow is set, the
/// norm-preserving flow, which is exploratory) and records min eig f(a(t)).
/// f(a) > 0 means min eig > 1e-10.
HeatPositivityReport heat_positivity_experiment(const TorusModel& m, const ScalarFunction& f, const Matrix& a0,
                                                std::span<const double> times, bool normalized_flow = false);

/// |Delta(a^2) - (Delta a . a + a . Delta a + 2 sum_mu (delta_mu a)^2)|_HS.
double bochner_identity_check(const TorusModel& m, const Matrix& a);

} // namespace matflow
