#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "matflow/matrix.hpp"
#include "matflow/torus.hpp"

namespace matflow {

enum class ExperimentKind { Spectrum, Evolve, Stability, EntropyStability, Convexity, HeatPositivity, Bochner };

std::optional<ExperimentKind> parse_kind(std::string_view name);
std::string_view kind_name(ExperimentKind k);

struct ModelSpec {
    std::size_t n = 0;
    std::string variant = "clock-shift";
    std::string x_file;
    std::string y_file;
    bool operator==(const ModelSpec&) const = default;
};

/// Initial data: a preset name or a matrix file. Random presets use `seed`
/// when given, otherwise a seed derived from the run seed.
struct InitSpec {
    std::string preset;
    std::string file;
    std::optional<std::uint64_t> seed;
    bool empty() const { return preset.empty() && file.empty(); }
    bool operator==(const InitSpec&) const = default;
};

struct SolverSpec {
    std::string tag = "spectral";
    double dt = 1e-2;
    double t_end = 1.0;
    double tol = 1e-8;
    int k_max = 50;
    bool renormalize = false;
    bool operator==(const SolverSpec&) const = default;
};

struct OutputSpec {
    std::vector<std::string> paths;
    /// csv | json; inferred from the path extension when omitted.
    std::vector<std::string> formats;
    bool with_matrices = false;
    std::string manifest = "manifest.json";
    bool operator==(const OutputSpec&) const = default;
};

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::Spectrum;
    ModelSpec model;
    InitSpec init;
    InitSpec u0;
    InitSpec v0;
    SolverSpec solver;
    std::vector<std::string> checks;
    OutputSpec output;
    std::uint64_t seed = 0;
    // convexity / heat-positivity / bochner / stability parameters
    std::string function = "identity";
    std::size_t dim = 2;
    std::size_t trials = 200;
    std::string t_grid = "0:0.1:5";
    std::size_t fannes_d = 0;
    bool normalized_flow = false;

    bool operator==(const ExperimentConfig&) const = default;
};

struct ParseResult {
    std::optional<ExperimentConfig> config;
    /// Every validation problem found, not just the first.
    std::vector<std::string> errors;
    bool ok() const { return config.has_value(); }
};

/// Validates a JSON config. Relative matrix-file paths resolve against base_dir.
ParseResult parse_config(std::string_view text, const std::filesystem::path& base_dir = {});
ParseResult validate_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json emit_config(const ExperimentConfig& cfg);

/// Checks understood by each experiment kind.
const std::vector<std::string>& known_checks(ExperimentKind kind);

/// Initial-data library:
///   two-mode               (sigma_x + sigma_y)/2 for n = 2, (phi_1 + phi_2)/sqrt 2 otherwise
///   random-tracefree-unit  random Hermitian, trace removed, unit HS norm
///   random-pd-unit         B^dagger B + 1e-2 I, unit HS norm
///   eigen:<i>              phi_i
/// Throws InvalidInput for unknown names or out-of-range indices.
Matrix preset(std::string_view name, const TorusModel& m, std::uint64_t seed);
Matrix preset(std::string_view name, std::size_t n, std::uint64_t seed);

/// Parses "start:step:end".
std::vector<double> parse_time_grid(std::string_view spec);

struct CheckVerdict {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct RunManifest {
    nlohmann::json config;
    std::vector<std::string> artifacts;
    double wall_seconds = 0.0;
    std::vector<CheckVerdict> checks;
    std::string version;
    std::string rng;
    std::string error;
    int exit_code = 0;
};

nlohmann::json to_json(const RunManifest& m);

/// Executes the experiment, writes its artifacts and the manifest under
/// out_dir. exit_code is 0 when every requested check passes, 1 on a failed
/// check or runtime error. The manifest is written in every case.
RunManifest run(const ExperimentConfig& cfg, const std::filesystem::path& out_dir);

std::string version_string();

} // namespace matflow
