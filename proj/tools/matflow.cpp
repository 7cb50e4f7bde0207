// matflow command-line front end. Every subcommand builds a JSON config and
// goes through the same validation path as `run --config`.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "matflow/experiment.hpp"

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

struct Flags {
    std::size_t n = 0;
    std::string variant = "clock-shift";
    std::string x, y;
    std::vector<std::string> out;
    bool with_matrices = false;
    std::string init, u0, v0;
    std::string solver = "spectral";
    double t_end = 1.0;
    double dt = 1e-2;
    double tol = 1e-8;
    int k_max = 50;
    bool renormalize = false;
    std::size_t fannes_d = 0;
    std::string f = "identity";
    std::size_t dim = 2;
    std::size_t trials = 200;
    std::string t_grid = "0:0.1:5";
    bool normalized_flow = false;
    std::vector<std::string> checks;
};

void add_model(CLI::App* app, Flags& f) {
    app->add_option("--n", f.n, "matrix size")->required();
    app->add_option("--variant", f.variant, "clock-shift | custom");
    app->add_option("--x", f.x, "generator X matrix file (custom variant)");
    app->add_option("--y", f.y, "generator Y matrix file (custom variant)");
}

void add_common(CLI::App* app, Flags& f) {
    app->add_option("--out", f.out, "artifact path(s); format follows the extension");
    app->add_option("--check", f.checks, "invariant to assert (repeatable)");
}

json build_config(const std::string& kind, const Flags& f, CLI::App* sub) {
    json j{{"kind", kind}};
    auto given = [&](const char* name) {
        const auto* opt = sub->get_option_no_throw(name);
        return opt != nullptr && opt->count() > 0;
    };
    if (sub->get_option_no_throw("--n")) {
        json m{{"n", f.n}, {"variant", f.variant}};
        if (!f.x.empty()) m["x"] = f.x;
        if (!f.y.empty()) m["y"] = f.y;
        j["model"] = m;
    }
    if (given("--init")) j["init"] = f.init;
    if (given("--u0")) j["u0"] = f.u0;
    if (given("--v0")) j["v0"] = f.v0;
    j["solver"] = {{"tag", f.solver}, {"t_end", f.t_end}, {"dt", f.dt},
                   {"tol", f.tol},    {"k_max", f.k_max}, {"renormalize", f.renormalize}};
    j["function"] = f.f;
    j["dim"] = f.dim;
    j["trials"] = f.trials;
    j["t_grid"] = f.t_grid;
    j["fannes_d"] = f.fannes_d;
    j["normalized_flow"] = f.normalized_flow;
    j["checks"] = f.checks;
    j["output"] = {{"paths", f.out}, {"with_matrices", f.with_matrices}};
    return j;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Matrix-geometry heat and normalized flows"};
    app.set_version_flag("--version", matflow::version_string());
    app.require_subcommand(1);

    std::uint64_t seed = 0;
    std::string out_dir = ".";
    bool quiet = false;
    app.add_option("--seed", seed, "run seed")->capture_default_str();
    app.add_option("--out-dir", out_dir, "directory for artifacts and manifest")->capture_default_str();
    app.add_flag("--quiet", quiet, "suppress the summary");

    Flags f;

    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues of the Laplacian");
    add_model(spectrum, f);
    add_common(spectrum, f);
    spectrum->add_flag("--with-matrices", f.with_matrices, "include eigen-matrices in JSON output");

    auto* evolve = app.add_subcommand("evolve", "normalized flow trace");
    add_model(evolve, f);
    add_common(evolve, f);
    evolve->add_option("--init", f.init, "matrix file or preset")->required();
    evolve->add_option("--solver", f.solver, "spectral | picard | rk4");
    evolve->add_option("--t-end", f.t_end);
    evolve->add_option("--dt", f.dt, "time step / sample spacing");
    evolve->add_option("--tol", f.tol);
    evolve->add_option("--k-max", f.k_max, "Picard iteration cap");
    evolve->add_flag("--renormalize", f.renormalize, "project RK4 steps back to the unit sphere");

    std::vector<CLI::App*> pair_cmds;
    for (const char* name : {"stability", "entropy-stability"}) {
        auto* s = app.add_subcommand(name, std::string(name) + " experiment on a pair of initial states");
        add_model(s, f);
        add_common(s, f);
        s->add_option("--u0", f.u0, "matrix file or preset")->required();
        s->add_option("--v0", f.v0, "matrix file, preset or near:<eps>")->required();
        s->add_option("--t-end", f.t_end);
        s->add_option("--dt", f.dt, "sample spacing");
        s->add_option("--fannes-d", f.fannes_d, "dimension in the Fannes bound (0 means n)");
        pair_cmds.push_back(s);
    }

    auto* convexity = app.add_subcommand("convexity", "sampled operator-convexity test");
    add_common(convexity, f);
    convexity->add_option("--f", f.f, "identity|square|cube|resolvent:<s>|loewner:<s>");
    convexity->add_option("--dim", f.dim);
    convexity->add_option("--trials", f.trials);

    auto* heat = app.add_subcommand("heat-positivity", "positivity of f(a(t)) along the heat flow");
    add_model(heat, f);
    add_common(heat, f);
    heat->add_option("--f", f.f);
    heat->add_option("--init", f.init, "matrix file or preset")->required();
    heat->add_option("--t-grid", f.t_grid, "start:step:end");
    heat->add_flag("--normalized", f.normalized_flow, "use the normalized flow instead");

    auto* bochner = app.add_subcommand("bochner", "Laplacian product identity on random matrices");
    add_model(bochner, f);
    add_common(bochner, f);
    bochner->add_option("--trials", f.trials);

    std::string config_path;
    auto* run_cmd = app.add_subcommand("run", "run a JSON config");
    run_cmd->add_option("--config", config_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    matflow::ParseResult parsed;
    if (run_cmd->parsed()) {
        std::ifstream in(config_path);
        if (!in) {
            std::cerr << "error: cannot read config " << config_path << '\n';
            return 2;
        }
        std::stringstream buf;
        buf << in.rdbuf();
        json j;
        try {
            j = json::parse(buf.str());
        } catch (const json::parse_error& e) {
            std::cerr << "error: config is not valid JSON: " << e.what() << '\n';
            return 2;
        }
        // A seed on the command line overrides the config.
        if (app.count("--seed") > 0 && j.is_object()) j["seed"] = seed;
        parsed = matflow::validate_config(j, fs::path(config_path).parent_path());
    } else {
        CLI::App* sub = app.get_subcommands().front();
        json j = build_config(sub->get_name(), f, sub);
        j["seed"] = seed;
        parsed = matflow::validate_config(j, fs::current_path());
    }

    if (!parsed.ok()) {
        for (const auto& e : parsed.errors) std::cerr << "config error: " << e << '\n';
        return 2;
    }

    const matflow::RunManifest m = matflow::run(*parsed.config, out_dir);
    if (!quiet) {
        for (const auto& a : m.artifacts) std::cout << "wrote " << a << '\n';
        for (const auto& c : m.checks)
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << (c.detail.empty() ? "" : ": " + c.detail)
                      << '\n';
    }
    if (!m.error.empty()) std::cerr << "error: " << m.error << '\n';
    return m.exit_code;
}
