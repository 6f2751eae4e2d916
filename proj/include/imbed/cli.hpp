#pragma once

#include <json.hpp>

#include <cstdint>
#include <exception>
#include <optional>
#include <ostream>
#include <string>

#include "imbed/fredholm_frontend.hpp"

namespace imbed {

enum class ExitCode : int {
    Ok = 0,
    SelftestFailed = 1,
    Config = 2,
    Singularity = 3,
    NonConvergence = 4,
    Io = 5,
};

struct OutputSpec {
    std::string prefix = "imbed";
    bool csv = true;
    bool json = false;
};

/// One run, parsed from a JSON document. Exactly one of `kernel` and `family`
/// is set for the scan, solve and eigs scenarios; hammerstein needs a kernel.
struct RunConfig {
    std::string scenario;
    std::optional<KernelSpec> kernel;
    std::optional<QuadratureGrid> grid;
    Weighting weighting = Weighting::OneSided;
    /// f(λ) = offset + λ·slope given as operator dumps.
    std::optional<OperatorFamily> family;
    std::optional<LambdaPath> path;
    IntegratorConfig integrator;
    OutputSpec output;
    std::uint64_t seed = 0;
    /// The scenario's own section ("solve", "eigs", ...), possibly empty.
    nlohmann::json params;
};

/// Throws ConfigError on anything malformed. Relative table paths are resolved
/// against `base_dir`.
RunConfig parse_config(const nlohmann::json& doc, const std::string& scenario, const std::string& base_dir = ".");
RunConfig load_config(const std::string& path, const std::string& scenario);

/// Executes the scenario and writes <prefix>_*.csv / .json. Errors propagate.
ExitCode run(const RunConfig& cfg, std::ostream& log);

ExitCode exit_code_for(const std::exception& e);
/// {error_kind, lambda, message}; lambda is [re, im] or null.
nlohmann::json error_record(const std::exception& e);

/// Full front door: runs, and on failure prints the error record to `err`
/// and writes <prefix>_error.json when a prefix is known.
int run_cli(const std::string& scenario, const std::string& config_path, const std::optional<std::string>& out,
            const std::optional<std::uint64_t>& seed, std::ostream& log, std::ostream& err);

} // namespace imbed
