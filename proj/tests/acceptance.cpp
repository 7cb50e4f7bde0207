// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "matflow/convexity.hpp"
#include "matflow/experiment.hpp"
#include "matflow/flows.hpp"
#include "matflow/linalg.hpp"
#include "matflow/random.hpp"
#include "matflow/stability.hpp"
#include "matflow/torus.hpp"
#include "oracle.hpp"

using namespace matflow;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        if (!ok && pass) {
            pass = false;
            detail = what;
        }
    }
};

char buf[256];

std::string fmt(const char* f, double x) {
    std::snprintf(buf, sizeof buf, f, x);
    return buf;
}

Matrix unit(Matrix a) { return a * (1.0 / hs_norm(a)); }

Matrix tracefree_unit(std::size_t n, Rng& rng) {
    Matrix a = random_hermitian(n, rng);
    const Complex tr = a.trace() / double(n);
    for (std::size_t i = 0; i < n; ++i) a(i, i) -= tr;
    return unit(a);
}

Matrix pd_unit(std::size_t n, Rng& rng) { return unit(random_psd(n, rng) + 1e-2 * Matrix::identity(n)); }

const TorusModel& model(std::size_t n) {
    static std::vector<std::unique_ptr<TorusModel>> cache(40);
    if (!cache[n]) cache[n] = std::make_unique<TorusModel>(build_model(n));
    return *cache[n];
}

Outcome spectrum_golden() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const TorusModel m = build_model(2);
    const auto& b = m.eigenbasis();
    const double expect[] = {0, 1, 1, 2};
    double err = 0.0;
    for (int i = 0; i < 4; ++i) err = std::max(err, std::abs(b.eigenvalues[i] - expect[i]));
    o.require(err <= 1e-10, "n=2 eigenvalue error " + fmt("%.3g", err));
    const Matrix& k = b.eigenmatrices[0];
    const Complex phase = k(0, 0) / std::abs(k(0, 0));
    const double kerr = max_abs_diff(k * std::conj(phase), Matrix::identity(2) * (1 / std::sqrt(2.0)));
    o.require(kerr <= 1e-10, "kernel differs from I/sqrt2 by " + fmt("%.3g", kerr));
    const auto ref = oracle::laplacian_spectrum(2);
    for (int i = 0; i < 4; ++i) o.require(std::abs(ref(i) - expect[i]) <= 1e-10, "oracle disagrees with golden values");
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(secs < 1.0, "runtime " + fmt("%.2f s", secs));

    // largest desk-scale model against the dense oracle
    const std::size_t big = 16;
    const auto& b16 = model(big).eigenbasis();
    const auto ref16 = oracle::laplacian_spectrum(big);
    double err16 = 0.0;
    for (std::size_t i = 0; i < big * big; ++i) err16 = std::max(err16, std::abs(b16.eigenvalues[i] - ref16(i)));
    o.require(err16 <= 1e-9 * b16.lambda_max(), "n=16 spectrum error " + fmt("%.3g", err16));
#ifdef MATFLOW_EXTENDED
    const std::size_t huge = 32;
    const auto& b32 = model(huge).eigenbasis();
    const auto ref32 = oracle::laplacian_spectrum(huge);
    double err32 = 0.0;
    for (std::size_t i = 0; i < huge * huge; ++i) err32 = std::max(err32, std::abs(b32.eigenvalues[i] - ref32(i)));
    o.require(err32 <= 1e-9 * b32.lambda_max(), "n=32 spectrum error " + fmt("%.3g", err32));
#endif
    if (o.pass)
        o.detail = "n=2 err " + fmt("%.2g", err) + ", kernel err " + fmt("%.2g", kerr) + ", n=16 err " +
                   fmt("%.2g", err16) + ", n=2 time " + fmt("%.3f s", secs);
    return o;
}

Outcome norm_conservation() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0, worst_rk4 = 0.0;
    const auto times = uniform_grid(0.0, 0.1, 20.0);
    for (std::size_t n = 2; n <= 8; ++n) {
        for (std::uint64_t k = 0; k < 20; ++k) {
            Rng rng(derive_seed(200 + n, k));
            const Matrix a0 = unit(random_gaussian(n, rng));
            for (const auto& obs : normalized_flow_trace(model(n), a0, times).observations)
                worst = std::max(worst, std::abs(obs.norm_sq - 1.0));
            if (k < 3) {
                Rk4Options r;
                r.dt = 1e-3;
                r.t_end = 5.0;
                const auto tr = normalized_flow_rk4(model(n), a0, r);
                worst_rk4 = std::max(worst_rk4, std::abs(tr.observations.back().norm_sq - 1.0));
            }
        }
    }
    // one trajectory on the largest model
    {
        Rng rng(216);
        const Matrix a0 = unit(random_gaussian(16, rng));
        for (const auto& obs : normalized_flow_trace(model(16), a0, times).observations)
            worst = std::max(worst, std::abs(obs.norm_sq - 1.0));
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(worst <= 1e-12, "spectral drift " + fmt("%.3g", worst));
    o.require(worst_rk4 <= 1e-6, "RK4 drift " + fmt("%.3g", worst_rk4));
    o.require(secs < 30.0, "runtime " + fmt("%.1f s", secs));
    if (o.pass)
        o.detail = "spectral drift " + fmt("%.2g", worst) + ", RK4 drift at t=5 " + fmt("%.2g", worst_rk4) + ", " +
                   fmt("%.1f s", secs);
    return o;
}

Outcome monotonicity_and_convergence() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    const auto times = uniform_grid(0.0, 0.5, 400.0);
    double rise = 0.0, resid = 0.0, below_gap = 0.0, match = 0.0;
    for (std::size_t n = 2; n <= 6; ++n) {
        const auto& basis = model(n).eigenbasis();
        for (std::uint64_t k = 0; k < 20; ++k) {
            Rng rng(derive_seed(300 + n, k));
            const Matrix a0 = tracefree_unit(n, rng);
            const FlowTrace tr = normalized_flow_trace(model(n), a0, times);
            for (std::size_t j = 1; j < tr.observations.size(); ++j)
                rise = std::max(rise, tr.observations[j].lambda - tr.observations[j - 1].lambda);
            const auto& last = tr.observations.back();
            resid = std::max(resid, last.residual);
            double nearest = 1e300;
            for (double e : basis.eigenvalues) nearest = std::min(nearest, std::abs(e - last.lambda));
            match = std::max(match, nearest);
            below_gap = std::max(below_gap, basis.gap - last.lambda);
        }
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(rise <= 1e-10, "lambda increased by " + fmt("%.3g", rise));
    o.require(resid <= 1e-8, "final residual " + fmt("%.3g", resid));
    o.require(match <= 1e-6, "lambda_inf off the spectrum by " + fmt("%.3g", match));
    o.require(below_gap <= 1e-6, "lambda_inf below the gap by " + fmt("%.3g", below_gap));
    o.require(secs < 60.0, "runtime " + fmt("%.1f s", secs));
    if (o.pass)
        o.detail = "max rise " + fmt("%.2g", rise) + ", max residual " + fmt("%.2g", resid) + ", eigenvalue match " +
                   fmt("%.2g", match) + ", " + fmt("%.1f s", secs);
    return o;
}

Outcome dlambda_formula() {
    Outcome o;
    double worst = 0.0;
    const double h = 1e-5;
    for (std::size_t n = 2; n <= 6; ++n) {
        for (std::uint64_t k = 0; k < 4; ++k) {
            Rng rng(derive_seed(400 + n, k));
            const Matrix a0 = tracefree_unit(n, rng);
            const TorusModel& m = model(n);
            for (int j = 1; j <= 10; ++j) {
                const double t = 0.2 * j;
                const double fd = (rayleigh(m, normalized_flow_spectral(m, a0, t + h)) -
                                   rayleigh(m, normalized_flow_spectral(m, a0, t - h))) /
                                  (2 * h);
                const double r = observe(m, t, normalized_flow_spectral(m, a0, t)).residual;
                const double tol = std::max(1e-6, 1e-3 * std::abs(fd));
                const double err = std::abs(fd + 2 * r * r);
                worst = std::max(worst, err / tol);
                o.require(err <= tol, "n=" + std::to_string(n) + " t=" + fmt("%.1f", t) + " mismatch " +
                                          fmt("%.3g", err));
            }
        }
    }
    if (o.pass) o.detail = "worst error / tolerance " + fmt("%.2g", worst) + " over 200 samples";
    return o;
}

double rk4_sup_error(const TorusModel& m, const Matrix& a0, double dt) {
    Rk4Options r;
    r.dt = dt;
    r.t_end = 1.0;
    r.keep_states = true;
    const FlowTrace tr = normalized_flow_rk4(m, a0, r);
    double e = 0.0;
    for (std::size_t j = 0; j < tr.states.size(); ++j)
        e = std::max(e, max_abs_diff(tr.states[j], normalized_flow_spectral(m, a0, tr.observations[j].t)));
    return e;
}

Outcome solver_cross_validation() {
    Outcome o;
    double sup = 0.0;
    int iters = 0;
    for (std::size_t n = 2; n <= 5; ++n) {
        Rng rng(derive_seed(500, n));
        const Matrix a0 = n == 2 ? preset("two-mode", model(2), 0) : unit(random_hermitian(n, rng));
        PicardOptions p;
        p.step = 1e-3;
        const FlowTrace tr = normalized_flow_picard(model(n), a0, p);
        sup = std::max(sup, tr.picard->sup_distance_to_spectral);
        iters = std::max(iters, tr.picard->iterations);
        o.require(tr.picard->converged, "Picard did not converge for n=" + std::to_string(n));
    }
    o.require(sup <= 1e-6, "Picard sup distance " + fmt("%.3g", sup));
    o.require(iters <= 50, "Picard used " + std::to_string(iters) + " iterations");

    std::string ratios;
    const auto check_ratio = [&](const TorusModel& m, const Matrix& a0) {
        const double ratio = rk4_sup_error(m, a0, 1e-2) / rk4_sup_error(m, a0, 5e-3);
        ratios += (ratios.empty() ? "" : ", ") + fmt("%.2f", ratio);
        o.require(ratio >= 8.0 && ratio <= 32.0, "RK4 error ratio " + fmt("%.3g", ratio));
    };
    check_ratio(model(2), preset("two-mode", model(2), 0));
    Rng rng(501);
    check_ratio(model(3), unit(random_hermitian(3, rng)));
    if (o.pass)
        o.detail = "Picard sup " + fmt("%.2g", sup) + " in <= " + std::to_string(iters) + " iterations, RK4 ratios " +
                   ratios;
    return o;
}

Outcome positivity_and_trace() {
    Outcome o;
    const auto times = uniform_grid(0.0, 0.1, 5.0);
    double min_eig = 1e300, ld_drop = 0.0, tr_max = 0.0;
    for (std::uint64_t k = 0; k < 100; ++k) {
        const std::size_t n = 2 + k % 5;
        Rng rng(derive_seed(600, k));
        const FlowTrace pd = normalized_flow_trace(model(n), pd_unit(n, rng), times);
        for (std::size_t j = 0; j < pd.observations.size(); ++j) {
            const auto& ob = pd.observations[j];
            min_eig = std::min(min_eig, ob.min_eig.value_or(-1.0));
            if (j > 0 && ob.log_det && pd.observations[j - 1].log_det)
                ld_drop = std::max(ld_drop, *pd.observations[j - 1].log_det - *ob.log_det);
            if (!ob.log_det) ld_drop = 1e300;
        }
        const FlowTrace tf = normalized_flow_trace(model(n), tracefree_unit(n, rng), times);
        for (const auto& ob : tf.observations) tr_max = std::max(tr_max, std::abs(ob.trace));
    }
    o.require(min_eig > 0.0, "min eigenvalue " + fmt("%.3g", min_eig));
    o.require(ld_drop <= 1e-8, "log det decreased by " + fmt("%.3g", ld_drop));
    o.require(tr_max <= 1e-10, "trace reached " + fmt("%.3g", tr_max));
    if (o.pass)
        o.detail = "min eigenvalue " + fmt("%.3g", min_eig) + ", max log det drop " + fmt("%.2g", ld_drop) +
                   ", max |trace| " + fmt("%.2g", tr_max);
    return o;
}

Outcome bochner() {
    Outcome o;
    const auto start = std::chrono::steady_clock::now();
    double worst = 0.0;
    for (std::size_t n = 2; n <= 8; ++n)
        for (std::uint64_t k = 0; k < 100; ++k) {
            Rng rng(derive_seed(700 + n, k));
            const Matrix a = random_gaussian(n, rng);
            worst = std::max(worst, bochner_identity_check(model(n), a) / std::max(1.0, hs_norm_sq(a)));
        }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    o.require(worst <= 1e-9, "relative residual " + fmt("%.3g", worst));
    o.require(secs < 10.0, "runtime " + fmt("%.1f s", secs));
    if (o.pass) o.detail = "max relative residual " + fmt("%.2g", worst) + ", " + fmt("%.2f s", secs);
    return o;
}

Outcome entropy_machinery() {
    Outcome o;
    o.require(eta(0.0) == 0.0, "eta(0) != 0");
    o.require(std::abs(eta(1 / std::numbers::e) - 1 / std::numbers::e) <= 1e-15, "eta(1/e) != 1/e");
    int fannes = 0;
    for (std::uint64_t k = 0; k < 200; ++k) {
        const std::size_t n = 2 + k % 5;
        Rng rng(derive_seed(800, k));
        const Matrix u = pd_unit(n, rng);
        Matrix h = random_hermitian(n, rng);
        // below the smallest eigenvalue keeps v positive definite; below 0.18/sqrt(n)
        // keeps the trace distance under 1/e
        const double cap = std::min(min_eigenvalue(u), 0.18 / std::sqrt(double(n)));
        const double eps = (0.05 + 0.9 * rng.uniform()) * cap;
        const Matrix v = unit(u + h * (eps / hs_norm(h)));
        for (std::size_t d : {n, n * n}) {
            const auto c = fannes_check(u, v, d);
            o.require(c.in_regime, "pair " + std::to_string(k) + " left the regime");
            o.require(c.holds, "Fannes fails on pair " + std::to_string(k));
            ++fannes;
        }
    }
    int evolved = 0;
    for (std::uint64_t k = 0; k < 20; ++k) {
        const std::size_t n = 2 + k % 3;
        Rng rng(derive_seed(810, k));
        const Matrix u = pd_unit(n, rng);
        Matrix h = random_hermitian(n, rng);
        const Matrix v = unit(u + h * (1e-3 / hs_norm(h)));
        StabilityOptions s;
        s.t_end = 2.0;
        s.step = 0.05;
        s.fannes_d = n * n;
        const auto r = entropy_stability_experiment(model(n), u, v, s);
        o.require(r.status == "ok", "pair " + std::to_string(k) + " is " + r.status);
        o.require(r.all_bounds_hold, "entropy bound fails on pair " + std::to_string(k));
        ++evolved;
    }
    if (o.pass)
        o.detail = std::to_string(fannes) + " Fannes checks (d=n and d=n^2), " + std::to_string(evolved) +
                   " evolved pairs, eta golden values exact";
    return o;
}

Outcome operator_convexity() {
    Outcome o;
    const std::vector<ScalarFunction> convex{
        ScalarFunction::identity(),          ScalarFunction::square(),
        ScalarFunction::resolvent(0.1),      ScalarFunction::resolvent(1.0),
        ScalarFunction::resolvent(10.0),     ScalarFunction::loewner_integrand(0.1),
        ScalarFunction::loewner_integrand(1), ScalarFunction::loewner_integrand(10.0)};
    double worst = 1e300;
    for (const auto& f : convex) {
        const auto v = is_operator_convex_sampled(f, 4, 200, 9);
        worst = std::min(worst, v.worst_gap_min_eig);
        o.require(v.is_convex_on_samples && v.worst_gap_min_eig >= -1e-9, f.name() + " flagged non-convex");
    }
    const auto c1 = is_operator_convex_sampled(ScalarFunction::cube(), 2, 200, 9);
    const auto c2 = is_operator_convex_sampled(ScalarFunction::cube(), 2, 200, 9);
    o.require(!c1.is_convex_on_samples && c1.witness.has_value(), "no witness for cube");
    if (c1.witness && c2.witness) {
        o.require(c1.witness->trial == c2.witness->trial && c1.witness->a == c2.witness->a &&
                      c1.witness->b == c2.witness->b,
                  "cube witness not reproducible");
        const double g = min_eigenvalue(convexity_gap(ScalarFunction::cube(), c1.witness->a, c1.witness->b,
                                                      c1.witness->mu));
        o.require(g < -1e-9, "replayed witness has gap " + fmt("%.3g", g));
    }
    if (o.pass)
        o.detail = "8 convex functions, worst gap min-eig " + fmt("%.2g", worst) + "; cube witness at trial " +
                   std::to_string(c1.witness->trial);
    return o;
}

Outcome heat_positivity() {
    Outcome o;
    const auto times = uniform_grid(0.0, 0.1, 5.0);
    double worst = 1e300;
    for (std::uint64_t k = 0; k < 50; ++k) {
        const std::size_t n = 2 + k % 5;
        Rng rng(derive_seed(1000, k));
        const Matrix a0 = pd_unit(n, rng);
        for (const auto& f : {ScalarFunction::identity(), ScalarFunction::square(), ScalarFunction::resolvent(1.0)}) {
            const auto r = heat_positivity_experiment(model(n), f, a0, times);
            o.require(r.status == "ok" && r.all_positive, f.name() + " loses positivity on state " + std::to_string(k));
            for (double e : r.min_eig_f) worst = std::min(worst, e);
        }
    }
    if (o.pass) o.detail = "150 runs, smallest min_eig(f(a(t))) " + fmt("%.3g", worst);
    return o;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
}

Outcome cli_determinism() {
    Outcome o;
    const std::vector<std::string> commands{
        "spectrum --n 3 --with-matrices --out s.json",
        "evolve --n 4 --init random-tracefree-unit --solver spectral --t-end 10 --dt 0.1 --out t.csv",
        "evolve --n 3 --init random-pd-unit --solver picard --t-end 1 --dt 0.01 --out t.csv",
        "evolve --n 3 --init random-tracefree-unit --solver rk4 --t-end 1 --dt 0.01 --out t.csv",
        "stability --n 3 --u0 random-pd-unit --v0 near:0.01 --t-end 1 --dt 0.1 --out r.json",
        "entropy-stability --n 3 --u0 random-pd-unit --v0 near:0.001 --t-end 1 --dt 0.1 --out r.json",
        "convexity --f cube --dim 3 --trials 100 --out c.json",
        "heat-positivity --n 3 --f resolvent:1 --init random-pd-unit --t-grid 0:0.5:5 --out h.json",
        "bochner --n 5 --trials 10 --out b.json",
    };
    const fs::path root = fs::current_path() / "acceptance_cli";
    int compared = 0;
    for (std::size_t k = 0; k < commands.size(); ++k) {
        std::vector<fs::path> dirs;
        for (const char* threads : {"1", "1", "3"}) {
            const fs::path dir = root / (std::to_string(k) + "_" + std::to_string(dirs.size()));
            fs::remove_all(dir);
            const std::string cmd = std::string("OMP_NUM_THREADS=") + threads + " " + MATFLOW_CLI_PATH +
                                    " --quiet --seed 11 --out-dir " + dir.string() + " " + commands[k];
            const int status = std::system(cmd.c_str());
            o.require(status == 0, "command failed: " + commands[k]);
            dirs.push_back(dir);
        }
        for (const auto& entry : fs::directory_iterator(dirs[0])) {
            const auto name = entry.path().filename();
            if (name == "manifest.json") continue;
            const std::string ref = slurp(dirs[0] / name);
            o.require(!ref.empty(), "empty artifact for " + commands[k]);
            o.require(ref == slurp(dirs[1] / name), "rerun differs: " + commands[k]);
            o.require(ref == slurp(dirs[2] / name), "thread count changes output: " + commands[k]);
            ++compared;
        }
    }
    if (o.pass) o.detail = std::to_string(compared) + " artifacts identical across reruns and 1 vs 3 threads";
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
        {"spectrum golden test", spectrum_golden},
        {"norm conservation", norm_conservation},
        {"Rayleigh monotonicity and convergence", monotonicity_and_convergence},
        {"dlambda/dt = -2 residual^2", dlambda_formula},
        {"solver cross-validation", solver_cross_validation},
        {"positivity and trace preservation", positivity_and_trace},
        {"Bochner identity", bochner},
        {"entropy machinery", entropy_machinery},
        {"operator convexity sampler", operator_convexity},
        {"heat-flow f-positivity", heat_positivity},
        {"CLI determinism", cli_determinism},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        std::printf("%s %2zu %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first, o.detail.c_str(),
                    secs);
        std::fflush(stdout);
        if (!o.pass) ++failures;
    }
    return failures == 0 ? 0 : 1;
}
