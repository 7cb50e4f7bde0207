#include "matflow/experiment.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "matflow/convexity.hpp"
#include "matflow/errors.hpp"
#include "matflow/flows.hpp"
#include "matflow/kernels.hpp"
#include "matflow/linalg.hpp"
#include "matflow/matrix_io.hpp"
#include "matflow/random.hpp"
#include "matflow/stability.hpp"

namespace matflow {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const std::map<std::string, ExperimentKind, std::less<>>& kind_table() {
    static const std::map<std::string, ExperimentKind, std::less<>> t{
        {"spectrum", ExperimentKind::Spectrum},
        {"evolve", ExperimentKind::Evolve},
        {"stability", ExperimentKind::Stability},
        {"entropy-stability", ExperimentKind::EntropyStability},
        {"convexity", ExperimentKind::Convexity},
        {"heat-positivity", ExperimentKind::HeatPositivity},
        {"bochner", ExperimentKind::Bochner},
    };
    return t;
}

bool needs_model(ExperimentKind k) { return k != ExperimentKind::Convexity; }
bool needs_init(ExperimentKind k) { return k == ExperimentKind::Evolve || k == ExperimentKind::HeatPositivity; }
bool needs_pair(ExperimentKind k) {
    return k == ExperimentKind::Stability || k == ExperimentKind::EntropyStability;
}

std::optional<std::size_t> parse_index(std::string_view text) {
    std::size_t v = 0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return v;
}

std::optional<double> parse_real(std::string_view text) {
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc{} || ptr != text.data() + text.size() || text.empty()) return std::nullopt;
    return v;
}

bool known_preset(std::string_view name, bool allow_near) {
    if (name == "two-mode" || name == "random-tracefree-unit" || name == "random-pd-unit") return true;
    if (name.starts_with("eigen:")) return parse_index(name.substr(6)).has_value();
    if (allow_near && name.starts_with("near:")) {
        const auto eps = parse_real(name.substr(5));
        return eps && *eps > 0.0;
    }
    return false;
}

std::string resolve(const std::string& file, const fs::path& base) {
    if (file.empty()) return file;
    fs::path p(file);
    if (p.is_relative() && !base.empty()) p = base / p;
    return p.lexically_normal().string();
}

// Reads an init block; records problems into errors.
InitSpec read_init(const json& j, const char* field, const fs::path& base, bool allow_near,
                   std::vector<std::string>& errors) {
    InitSpec s;
    if (j.is_string()) {
        const auto text = j.get<std::string>();
        if (known_preset(text, allow_near) || !fs::exists(resolve(text, base)))
            s.preset = text;
        else
            s.file = text;
    } else if (j.is_object()) {
        for (const auto& [key, _] : j.items())
            if (key != "preset" && key != "file" && key != "seed")
                errors.push_back(std::string(field) + ": unknown key '" + key + "'");
        if (j.contains("preset")) {
            if (j["preset"].is_string())
                s.preset = j["preset"].get<std::string>();
            else
                errors.push_back(std::string(field) + ".preset must be a string");
        }
        if (j.contains("file")) {
            if (j["file"].is_string())
                s.file = j["file"].get<std::string>();
            else
                errors.push_back(std::string(field) + ".file must be a string");
        }
        if (j.contains("seed")) {
            if (j["seed"].is_number_unsigned())
                s.seed = j["seed"].get<std::uint64_t>();
            else
                errors.push_back(std::string(field) + ".seed must be a non-negative integer");
        }
    } else {
        errors.push_back(std::string(field) + " must be a preset name or an object");
        return s;
    }
    if (!s.preset.empty() && !s.file.empty())
        errors.push_back(std::string(field) + ": give either a preset or a file, not both");
    if (s.preset.empty() && s.file.empty()) errors.push_back(std::string(field) + ": missing preset or file");
    if (!s.preset.empty() && !known_preset(s.preset, allow_near))
        errors.push_back(std::string(field) + ": unknown preset '" + s.preset + "'");
    if (!s.file.empty()) {
        s.file = resolve(s.file, base);
        try {
            (void)read_matrix_file(s.file);
        } catch (const std::exception& e) {
            errors.push_back(std::string(field) + ": unreadable matrix file: " + e.what());
        }
    }
    return s;
}

template <class T>
void read_number(const json& obj, const char* key, T& out, const std::string& where, std::vector<std::string>& errors) {
    if (!obj.contains(key)) return;
    const auto& v = obj[key];
    if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) {
            errors.push_back(where + key + " must be a boolean");
            return;
        }
        out = v.get<bool>();
    } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) {
            errors.push_back(where + key + " must be a number");
            return;
        }
        out = v.get<T>();
    } else if constexpr (std::is_unsigned_v<T>) {
        if (!v.is_number_unsigned()) {
            errors.push_back(where + key + " must be a non-negative integer");
            return;
        }
        out = v.get<T>();
    } else {
        if (!v.is_number_integer()) {
            errors.push_back(where + key + " must be an integer");
            return;
        }
        out = v.get<T>();
    }
}

void read_string(const json& obj, const char* key, std::string& out, const std::string& where,
                 std::vector<std::string>& errors) {
    if (!obj.contains(key)) return;
    if (!obj[key].is_string()) {
        errors.push_back(where + key + " must be a string");
        return;
    }
    out = obj[key].get<std::string>();
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where,
                std::vector<std::string>& errors) {
    for (const auto& [key, _] : obj.items()) {
        const bool ok = std::any_of(allowed.begin(), allowed.end(), [&](const char* a) { return key == a; });
        if (!ok) errors.push_back(where + "unknown key '" + key + "'");
    }
}

json init_to_json(const InitSpec& s) {
    json j = json::object();
    if (!s.preset.empty()) j["preset"] = s.preset;
    if (!s.file.empty()) j["file"] = s.file;
    if (s.seed) j["seed"] = *s.seed;
    return j;
}

std::string infer_format(const std::string& path) {
    const auto ext = fs::path(path).extension().string();
    if (ext == ".csv") return "csv";
    return "json";
}

std::string default_output(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::Spectrum: return "spectrum.csv";
    case ExperimentKind::Evolve: return "trace.csv";
    case ExperimentKind::Stability: return "report.json";
    case ExperimentKind::EntropyStability: return "entropy_report.json";
    case ExperimentKind::Convexity: return "convexity.json";
    case ExperimentKind::HeatPositivity: return "heat_positivity.json";
    case ExperimentKind::Bochner: return "bochner.json";
    }
    return "out.json";
}

} // namespace

std::optional<ExperimentKind> parse_kind(std::string_view name) {
    const auto& t = kind_table();
    const auto it = t.find(name);
    if (it == t.end()) return std::nullopt;
    return it->second;
}

std::string_view kind_name(ExperimentKind k) {
    for (const auto& [name, kind] : kind_table())
        if (kind == k) return name;
    return "?";
}

const std::vector<std::string>& known_checks(ExperimentKind kind) {
    static const std::map<ExperimentKind, std::vector<std::string>> t{
        {ExperimentKind::Spectrum, {"kernel_dim", "psd", "orthonormal"}},
        {ExperimentKind::Evolve,
         {"norm_conservation", "rayleigh_monotone", "trace_free", "positivity", "convergence", "picard_converged"}},
        {ExperimentKind::Stability, {"hs_bound", "fannes"}},
        {ExperimentKind::EntropyStability, {"entropy_bound"}},
        {ExperimentKind::Convexity, {"convex", "not_convex"}},
        {ExperimentKind::HeatPositivity, {"heat_positivity"}},
        {ExperimentKind::Bochner, {"bochner"}},
    };
    return t.at(kind);
}

std::vector<double> parse_time_grid(std::string_view spec) {
    std::vector<double> parts;
    std::size_t start = 0;
    while (true) {
        const auto colon = spec.find(':', start);
        const auto piece = spec.substr(start, colon == std::string_view::npos ? spec.npos : colon - start);
        const auto v = parse_real(piece);
        if (!v) throw InvalidInput("time grid '" + std::string(spec) + "': expected start:step:end");
        parts.push_back(*v);
        if (colon == std::string_view::npos) break;
        start = colon + 1;
    }
    if (parts.size() != 3) throw InvalidInput("time grid '" + std::string(spec) + "': expected start:step:end");
    return uniform_grid(parts[0], parts[1], parts[2]);
}

ParseResult parse_config(std::string_view text, const fs::path& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        return {std::nullopt, {std::string("config is not valid JSON: ") + e.what()}};
    }
    return validate_config(j, base_dir);
}

ParseResult validate_config(const json& j, const fs::path& base_dir) {
    ParseResult result;
    auto& errors = result.errors;
    if (!j.is_object()) {
        errors.push_back("config must be a JSON object");
        return result;
    }
    check_keys(j,
               {"kind", "model", "init", "u0", "v0", "solver", "checks", "output", "seed", "function", "dim", "trials",
                "t_grid", "fannes_d", "normalized_flow"},
               "", errors);

    ExperimentConfig cfg;
    std::optional<ExperimentKind> kind;
    if (!j.contains("kind")) {
        errors.push_back("missing required field 'kind'");
    } else if (!j["kind"].is_string() || !(kind = parse_kind(j["kind"].get<std::string>()))) {
        errors.push_back("unknown kind " + j["kind"].dump());
    } else {
        cfg.kind = *kind;
    }

    read_number(j, "seed", cfg.seed, "", errors);

    if (j.contains("model")) {
        const auto& m = j["model"];
        if (!m.is_object()) {
            errors.push_back("model must be an object");
        } else {
            check_keys(m, {"n", "variant", "x", "y"}, "model: ", errors);
            read_number(m, "n", cfg.model.n, "model.", errors);
            read_string(m, "variant", cfg.model.variant, "model.", errors);
            read_string(m, "x", cfg.model.x_file, "model.", errors);
            read_string(m, "y", cfg.model.y_file, "model.", errors);
            if (!m.contains("n")) errors.push_back("missing required field 'model.n'");
            else if (cfg.model.n < 2) errors.push_back("model.n must be at least 2");
            if (cfg.model.variant == "custom") {
                for (auto* f : {&cfg.model.x_file, &cfg.model.y_file}) {
                    if (f->empty()) {
                        errors.push_back("model: custom variant requires 'x' and 'y' matrix files");
                        continue;
                    }
                    *f = resolve(*f, base_dir);
                    try {
                        const Matrix g = read_matrix_file(*f);
                        if (g.n() != cfg.model.n) errors.push_back("model: generator file " + *f + " has wrong size");
                    } catch (const std::exception& e) {
                        errors.push_back(std::string("model: unreadable matrix file: ") + e.what());
                    }
                }
            } else if (cfg.model.variant != "clock-shift") {
                errors.push_back("model.variant must be clock-shift or custom");
            }
        }
    } else if (kind && needs_model(*kind)) {
        errors.push_back("missing required field 'model'");
    }

    if (j.contains("init")) cfg.init = read_init(j["init"], "init", base_dir, false, errors);
    else if (kind && needs_init(*kind)) errors.push_back("missing required field 'init'");
    if (j.contains("u0")) cfg.u0 = read_init(j["u0"], "u0", base_dir, false, errors);
    else if (kind && needs_pair(*kind)) errors.push_back("missing required field 'u0'");
    if (j.contains("v0")) cfg.v0 = read_init(j["v0"], "v0", base_dir, true, errors);
    else if (kind && needs_pair(*kind)) errors.push_back("missing required field 'v0'");

    if (j.contains("solver")) {
        const auto& s = j["solver"];
        if (!s.is_object()) {
            errors.push_back("solver must be an object");
        } else {
            check_keys(s, {"tag", "dt", "t_end", "tol", "k_max", "renormalize"}, "solver: ", errors);
            read_string(s, "tag", cfg.solver.tag, "solver.", errors);
            read_number(s, "dt", cfg.solver.dt, "solver.", errors);
            read_number(s, "t_end", cfg.solver.t_end, "solver.", errors);
            read_number(s, "tol", cfg.solver.tol, "solver.", errors);
            read_number(s, "k_max", cfg.solver.k_max, "solver.", errors);
            read_number(s, "renormalize", cfg.solver.renormalize, "solver.", errors);
        }
    }
    if (cfg.solver.tag != "spectral" && cfg.solver.tag != "picard" && cfg.solver.tag != "rk4")
        errors.push_back("solver.tag must be spectral, picard or rk4");
    if (!(cfg.solver.dt > 0.0)) errors.push_back("solver.dt must be positive");
    if (!(cfg.solver.t_end > 0.0)) errors.push_back("solver.t_end must be positive");
    if (!(cfg.solver.tol > 0.0)) errors.push_back("solver.tol must be positive");
    if (cfg.solver.k_max < 1) errors.push_back("solver.k_max must be at least 1");

    read_string(j, "function", cfg.function, "", errors);
    try {
        (void)ScalarFunction::parse(cfg.function);
    } catch (const std::exception& e) {
        errors.push_back(e.what());
    }
    read_number(j, "dim", cfg.dim, "", errors);
    if (cfg.dim < 1) errors.push_back("dim must be positive");
    read_number(j, "trials", cfg.trials, "", errors);
    if (cfg.trials < 1) errors.push_back("trials must be positive");
    read_string(j, "t_grid", cfg.t_grid, "", errors);
    try {
        (void)parse_time_grid(cfg.t_grid);
    } catch (const std::exception& e) {
        errors.push_back(e.what());
    }
    read_number(j, "fannes_d", cfg.fannes_d, "", errors);
    read_number(j, "normalized_flow", cfg.normalized_flow, "", errors);

    if (j.contains("checks")) {
        const auto& c = j["checks"];
        if (!c.is_array()) {
            errors.push_back("checks must be an array of names");
        } else {
            for (const auto& item : c) {
                if (!item.is_string()) {
                    errors.push_back("checks must be an array of names");
                    continue;
                }
                const auto name = item.get<std::string>();
                if (kind) {
                    const auto& known = known_checks(*kind);
                    if (std::find(known.begin(), known.end(), name) == known.end())
                        errors.push_back("unknown check '" + name + "' for kind " + std::string(kind_name(*kind)));
                }
                cfg.checks.push_back(name);
            }
        }
    }

    if (j.contains("output")) {
        const auto& o = j["output"];
        if (!o.is_object()) {
            errors.push_back("output must be an object");
        } else {
            check_keys(o, {"paths", "formats", "with_matrices", "manifest"}, "output: ", errors);
            auto read_list = [&](const char* key, std::vector<std::string>& out) {
                if (!o.contains(key)) return;
                if (!o[key].is_array()) {
                    errors.push_back(std::string("output.") + key + " must be an array of strings");
                    return;
                }
                for (const auto& v : o[key]) {
                    if (v.is_string())
                        out.push_back(v.get<std::string>());
                    else
                        errors.push_back(std::string("output.") + key + " must be an array of strings");
                }
            };
            read_list("paths", cfg.output.paths);
            read_list("formats", cfg.output.formats);
            read_number(o, "with_matrices", cfg.output.with_matrices, "output.", errors);
            read_string(o, "manifest", cfg.output.manifest, "output.", errors);
            if (!cfg.output.formats.empty() && cfg.output.formats.size() != cfg.output.paths.size())
                errors.push_back("output.formats must match output.paths in length");
            for (const auto& f : cfg.output.formats)
                if (f != "csv" && f != "json") errors.push_back("output format '" + f + "' must be csv or json");
        }
    }

    if (errors.empty()) result.config = std::move(cfg);
    return result;
}

json emit_config(const ExperimentConfig& cfg) {
    json j;
    j["kind"] = kind_name(cfg.kind);
    j["seed"] = cfg.seed;
    if (cfg.model.n > 0) {
        json m{{"n", cfg.model.n}, {"variant", cfg.model.variant}};
        if (!cfg.model.x_file.empty()) m["x"] = cfg.model.x_file;
        if (!cfg.model.y_file.empty()) m["y"] = cfg.model.y_file;
        j["model"] = std::move(m);
    }
    if (!cfg.init.empty()) j["init"] = init_to_json(cfg.init);
    if (!cfg.u0.empty()) j["u0"] = init_to_json(cfg.u0);
    if (!cfg.v0.empty()) j["v0"] = init_to_json(cfg.v0);
    j["solver"] = {{"tag", cfg.solver.tag},     {"dt", cfg.solver.dt},       {"t_end", cfg.solver.t_end},
                   {"tol", cfg.solver.tol},     {"k_max", cfg.solver.k_max}, {"renormalize", cfg.solver.renormalize}};
    j["function"] = cfg.function;
    j["dim"] = cfg.dim;
    j["trials"] = cfg.trials;
    j["t_grid"] = cfg.t_grid;
    j["fannes_d"] = cfg.fannes_d;
    j["normalized_flow"] = cfg.normalized_flow;
    j["checks"] = cfg.checks;
    j["output"] = {{"paths", cfg.output.paths},
                   {"formats", cfg.output.formats},
                   {"with_matrices", cfg.output.with_matrices},
                   {"manifest", cfg.output.manifest}};
    return j;
}

Matrix preset(std::string_view name, const TorusModel& m, std::uint64_t seed) {
    const std::size_t n = m.n();
    if (name == "two-mode") {
        if (n == 2) {
            Matrix a(2);
            a(0, 1) = Complex(0.5, -0.5);
            a(1, 0) = Complex(0.5, 0.5);
            return a;
        }
        const auto& b = m.eigenbasis();
        Matrix a = b.eigenmatrices[1] + b.eigenmatrices[2];
        a *= 1.0 / std::sqrt(2.0);
        return a;
    }
    if (name == "random-tracefree-unit") {
        Rng rng(seed);
        Matrix a = random_hermitian(n, rng);
        const Complex tr = a.trace() / static_cast<double>(n);
        for (std::size_t i = 0; i < n; ++i) a(i, i) -= tr;
        a *= 1.0 / hs_norm(a);
        return a;
    }
    if (name == "random-pd-unit") {
        Rng rng(seed);
        Matrix a = random_psd(n, rng) + 1e-2 * Matrix::identity(n);
        a *= 1.0 / hs_norm(a);
        return a;
    }
    if (name.starts_with("eigen:")) {
        const auto idx = parse_index(name.substr(6));
        if (!idx) throw InvalidInput("preset '" + std::string(name) + "': bad index");
        const auto& b = m.eigenbasis();
        if (*idx >= b.size())
            throw InvalidInput("preset '" + std::string(name) + "': index out of range (n^2 = " +
                               std::to_string(b.size()) + ")");
        return b.eigenmatrices[*idx];
    }
    throw InvalidInput("unknown preset '" + std::string(name) + "'");
}

Matrix preset(std::string_view name, std::size_t n, std::uint64_t seed) {
    return preset(name, build_model(n), seed);
}

std::string version_string() { return std::string("matflow ") + MATFLOW_VERSION; }

json to_json(const RunManifest& m) {
    json checks = json::array();
    for (const auto& c : m.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    return json{{"config", m.config},           {"artifacts", m.artifacts}, {"wall_seconds", m.wall_seconds},
                {"checks", std::move(checks)},  {"version", m.version},     {"rng", m.rng},
                {"error", m.error},             {"exit_code", m.exit_code}};
}

namespace {

struct Artifact {
    std::function<std::string()> csv;
    std::function<std::string()> json_text;
};

class Runner {
public:
    Runner(const ExperimentConfig& cfg, RunManifest& manifest, fs::path out_dir)
        : cfg_(cfg), manifest_(manifest), out_dir_(std::move(out_dir)) {}

    void execute() {
        switch (cfg_.kind) {
        case ExperimentKind::Spectrum: spectrum(); break;
        case ExperimentKind::Evolve: evolve(); break;
        case ExperimentKind::Stability: stability(false); break;
        case ExperimentKind::EntropyStability: stability(true); break;
        case ExperimentKind::Convexity: convexity(); break;
        case ExperimentKind::HeatPositivity: heat_positivity(); break;
        case ExperimentKind::Bochner: bochner(); break;
        }
    }

private:
    TorusModel model() const {
        if (cfg_.model.variant == "custom")
            return TorusModel::custom(read_matrix_file(cfg_.model.x_file), read_matrix_file(cfg_.model.y_file));
        return build_model(cfg_.model.n);
    }

    Matrix initial(const InitSpec& s, const TorusModel& m, std::uint64_t index) const {
        Matrix a;
        if (!s.file.empty()) {
            a = read_matrix_file(s.file);
            if (a.n() != m.n()) throw InvalidInput("initial matrix file " + s.file + " has the wrong dimension");
        } else {
            a = preset(s.preset, m, s.seed.value_or(derive_seed(cfg_.seed, index)));
        }
        return a;
    }

    // Records a verdict for a requested check; unrequested checks are ignored.
    void verdict(const std::string& name, bool passed, std::string detail = {}) {
        if (std::find(cfg_.checks.begin(), cfg_.checks.end(), name) == cfg_.checks.end()) return;
        manifest_.checks.push_back({name, passed, std::move(detail)});
    }

    void write(const Artifact& art) {
        std::vector<std::string> paths = cfg_.output.paths;
        if (paths.empty()) paths.push_back(default_output(cfg_.kind));
        for (std::size_t i = 0; i < paths.size(); ++i) {
            const std::string format =
                i < cfg_.output.formats.size() ? cfg_.output.formats[i] : infer_format(paths[i]);
            const auto& gen = format == "csv" ? art.csv : art.json_text;
            if (!gen)
                throw InvalidInput("kind " + std::string(kind_name(cfg_.kind)) + " cannot write " + format + " output");
            const fs::path target = out_dir_ / paths[i];
            if (target.has_parent_path()) fs::create_directories(target.parent_path());
            std::ofstream out(target, std::ios::binary);
            if (!out) throw InvalidInput("cannot write " + target.string());
            out << gen();
            manifest_.artifacts.push_back(target.string());
        }
    }

    void spectrum() {
        const TorusModel m = model();
        const EigenBasis& b = m.eigenbasis();
        verdict("kernel_dim", true, "kernel is one-dimensional");
        verdict("psd", b.eigenvalues.front() >= -1e-10, "min eigenvalue " + format_double(b.eigenvalues.front()));
        double orth = 0.0;
        const std::size_t big = b.size();
        Matrix gram(big);
        kernels::gemm_adjoint_left(big, big, big, b.columns.data(), b.columns.data(), gram.data());
        orth = max_abs_diff(gram, Matrix::identity(big));
        verdict("orthonormal", orth <= 1e-9, "max |<phi_i, phi_j> - delta_ij| = " + format_double(orth));
        Artifact art;
        art.csv = [&] {
            std::ostringstream os;
            os << "index,eigenvalue\n";
            for (std::size_t i = 0; i < big; ++i) os << i << ',' << format_double(b.eigenvalues[i]) << '\n';
            return os.str();
        };
        art.json_text = [&] {
            json j{{"n", m.n()},
                   {"variant", variant_name(m.variant())},
                   {"eigenvalues", b.eigenvalues},
                   {"gap", b.gap},
                   {"lambda_max", b.lambda_max()}};
            if (cfg_.output.with_matrices) {
                json mats = json::array();
                for (const auto& phi : b.eigenmatrices) mats.push_back(matrix_to_json(phi));
                j["eigenmatrices"] = std::move(mats);
            }
            return j.dump(2) + "\n";
        };
        write(art);
    }

    void evolve() {
        const TorusModel m = model();
        const Matrix a0 = initial(cfg_.init, m, 0);
        const Solver solver = parse_solver(cfg_.solver.tag);
        FlowTrace trace;
        double norm_tol = 1e-12;
        if (solver == Solver::Spectral) {
            const auto times = uniform_grid(0.0, cfg_.solver.dt, cfg_.solver.t_end);
            trace = normalized_flow_trace(m, a0, times);
        } else if (solver == Solver::Picard) {
            PicardOptions o;
            o.t_end = cfg_.solver.t_end;
            o.step = cfg_.solver.dt;
            o.tol = cfg_.solver.tol;
            o.k_max = cfg_.solver.k_max;
            trace = normalized_flow_picard(m, a0, o);
            norm_tol = 1e-6;
        } else {
            Rk4Options o;
            o.dt = cfg_.solver.dt;
            o.t_end = cfg_.solver.t_end;
            o.renormalize_each_step = cfg_.solver.renormalize;
            trace = normalized_flow_rk4(m, a0, o);
            if (!o.renormalize_each_step) norm_tol = 1e-6;
        }
        trace.convergence = detect_convergence(trace, m.eigenbasis(), cfg_.solver.tol);
        const auto& obs = trace.observations;

        double drift = 0.0, rise = 0.0, tr = 0.0, ld_drop = 0.0;
        bool positive = true;
        for (std::size_t j = 0; j < obs.size(); ++j) {
            drift = std::max(drift, std::abs(obs[j].norm_sq - 1.0));
            tr = std::max(tr, std::abs(obs[j].trace));
            if (!obs[j].min_eig || *obs[j].min_eig <= 0.0) positive = false;
            if (j > 0) {
                rise = std::max(rise, obs[j].lambda - obs[j - 1].lambda);
                if (obs[j].log_det && obs[j - 1].log_det)
                    ld_drop = std::max(ld_drop, *obs[j - 1].log_det - *obs[j].log_det);
            }
        }
        verdict("norm_conservation", drift <= norm_tol, "max |M(a)-1| = " + format_double(drift));
        verdict("rayleigh_monotone", rise <= 1e-10, "max lambda increase = " + format_double(rise));
        verdict("trace_free", tr <= 1e-10, "max |tr a| = " + format_double(tr));
        verdict("positivity", positive && ld_drop <= 1e-8,
                std::string(positive ? "positive definite" : "lost positivity") +
                    ", max log det decrease = " + format_double(ld_drop));
        const auto& c = *trace.convergence;
        verdict("convergence", c.converged && c.above_gap,
                "lambda_inf = " + format_double(c.lambda_inf) + ", residual = " + format_double(c.final_residual));
        if (trace.picard)
            verdict("picard_converged", trace.picard->converged,
                    "iterations = " + std::to_string(trace.picard->iterations));
        else
            verdict("picard_converged", false, "solver is not picard");

        Artifact art;
        art.csv = [&] {
            std::ostringstream os;
            write_trace_csv(os, trace);
            return os.str();
        };
        art.json_text = [&] {
            json j{{"solver", solver_name(solver)},
                   {"samples", obs.size()},
                   {"convergence",
                    {{"converged", c.converged},
                     {"lambda_inf", c.lambda_inf},
                     {"matched_eigenvalue_index", c.matched_eigenvalue_index},
                     {"matched_cluster_last", c.matched_cluster_last},
                     {"final_residual", c.final_residual},
                     {"t_converged", c.t_converged},
                     {"trace_free_initial", c.trace_free_initial},
                     {"above_gap", c.above_gap}}}};
            if (trace.picard)
                j["picard"] = {{"converged", trace.picard->converged},
                               {"iterations", trace.picard->iterations},
                               {"iterate_distances", trace.picard->iterate_distances},
                               {"sup_distance_to_spectral", trace.picard->sup_distance_to_spectral}};
            return j.dump(2) + "\n";
        };
        write(art);
    }

    void stability(bool entropy) {
        const TorusModel m = model();
        const Matrix u0 = initial(cfg_.u0, m, 0);
        Matrix v0;
        if (cfg_.v0.preset.starts_with("near:")) {
            const double eps = *parse_real(std::string_view(cfg_.v0.preset).substr(5));
            Rng rng(cfg_.v0.seed.value_or(derive_seed(cfg_.seed, 1)));
            Matrix h = random_hermitian(m.n(), rng);
            h *= eps / hs_norm(h);
            v0 = u0 + h;
            v0 *= 1.0 / hs_norm(v0);
        } else {
            v0 = initial(cfg_.v0, m, 1);
        }
        StabilityOptions o;
        o.t_end = cfg_.solver.t_end;
        o.step = cfg_.solver.dt;
        o.fannes_d = cfg_.fannes_d;
        const StabilityReport r =
            entropy ? entropy_stability_experiment(m, u0, v0, o) : hs_stability_experiment(m, u0, v0, o);
        bool hs_ok = true, fannes_ok = true;
        for (std::size_t j = 0; j < r.times.size(); ++j) {
            if (r.hs_dist_sq[j] > std::exp(r.estimated_C1 * r.times[j]) * r.hs_dist_sq[0] * (1.0 + 1e-8)) hs_ok = false;
            if (!std::isnan(r.fannes_rhs[j]) && r.entropy_gap[j] > r.fannes_rhs[j] + 1e-10) fannes_ok = false;
        }
        verdict("hs_bound", hs_ok, "estimated C1 = " + format_double(r.estimated_C1));
        verdict("fannes", fannes_ok);
        verdict("entropy_bound", r.status == "ok" && r.all_bounds_hold,
                "status " + r.status + ", rhs = " + format_double(r.theorem_rhs));
        Artifact art;
        art.json_text = [&] { return to_json(r).dump(2) + "\n"; };
        write(art);
    }

    void convexity() {
        const ScalarFunction f = ScalarFunction::parse(cfg_.function);
        const ConvexityVerdict v = is_operator_convex_sampled(f, cfg_.dim, cfg_.trials, cfg_.seed);
        verdict("convex", v.is_convex_on_samples, "worst gap min eig = " + format_double(v.worst_gap_min_eig));
        verdict("not_convex", !v.is_convex_on_samples,
                v.witness ? "witness at trial " + std::to_string(v.witness->trial) : "no witness found");
        Artifact art;
        art.json_text = [&] { return to_json(v, f).dump(2) + "\n"; };
        write(art);
    }

    void heat_positivity() {
        const TorusModel m = model();
        const ScalarFunction f = ScalarFunction::parse(cfg_.function);
        const Matrix a0 = initial(cfg_.init, m, 0);
        const auto times = parse_time_grid(cfg_.t_grid);
        const HeatPositivityReport r = heat_positivity_experiment(m, f, a0, times, cfg_.normalized_flow);
        verdict("heat_positivity", r.status == "ok" && r.all_positive, "status " + r.status);
        Artifact art;
        art.json_text = [&] { return to_json(r).dump(2) + "\n"; };
        write(art);
    }

    void bochner() {
        const TorusModel m = model();
        std::vector<double> rel(cfg_.trials);
        double worst = 0.0;
        for (std::size_t k = 0; k < cfg_.trials; ++k) {
            Rng rng(derive_seed(cfg_.seed, k));
            const Matrix a = random_gaussian(m.n(), rng);
            rel[k] = bochner_identity_check(m, a) / std::max(1.0, hs_norm_sq(a));
            worst = std::max(worst, rel[k]);
        }
        verdict("bochner", worst <= 1e-9, "max relative residual = " + format_double(worst));
        Artifact art;
        art.json_text = [&] {
            return json{{"n", m.n()}, {"trials", cfg_.trials}, {"relative_residuals", rel}, {"max_relative", worst}}
                       .dump(2) +
                   "\n";
        };
        write(art);
    }

    const ExperimentConfig& cfg_;
    RunManifest& manifest_;
    fs::path out_dir_;
};

} // namespace

RunManifest run(const ExperimentConfig& cfg, const fs::path& out_dir) {
    const auto start = std::chrono::steady_clock::now();
    RunManifest manifest;
    manifest.config = emit_config(cfg);
    manifest.version = version_string();
    manifest.rng = Rng::algorithm;
    try {
        fs::create_directories(out_dir.empty() ? fs::path(".") : out_dir);
        Runner(cfg, manifest, out_dir).execute();
        for (const auto& name : cfg.checks) {
            const bool seen = std::any_of(manifest.checks.begin(), manifest.checks.end(),
                                          [&](const CheckVerdict& c) { return c.name == name; });
            if (!seen) manifest.checks.push_back({name, false, "check not applicable to this run"});
        }
        const bool all = std::all_of(manifest.checks.begin(), manifest.checks.end(),
                                     [](const CheckVerdict& c) { return c.passed; });
        manifest.exit_code = all ? 0 : 1;
    } catch (const std::exception& e) {
        manifest.error = e.what();
        manifest.exit_code = 1;
        for (const auto& name : cfg.checks) {
            const bool seen = std::any_of(manifest.checks.begin(), manifest.checks.end(),
                                          [&](const CheckVerdict& c) { return c.name == name; });
            if (!seen) manifest.checks.push_back({name, false, "run failed before the check"});
        }
    }
    manifest.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    try {
        const fs::path path = out_dir / cfg.output.manifest;
        if (path.has_parent_path()) fs::create_directories(path.parent_path());
        std::ofstream out(path, std::ios::binary);
        out << to_json(manifest).dump(2) << '\n';
    } catch (const std::exception&) {
        if (manifest.error.empty()) manifest.error = "could not write manifest";
        manifest.exit_code = 1;
    }
    return manifest;
}

} // namespace matflow
