#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "imbed/cli.hpp"

int main(int argc, char** argv) {
    CLI::App app{"Parameter-imbedding solver for operator and integral equations"};
    std::string scenario;
    std::string config;
    std::optional<std::string> out;
    std::optional<std::uint64_t> seed;
    app.add_option("scenario", scenario, "scan | solve | eigs | hammerstein | selftest")
        ->required()
        ->check(CLI::IsMember({"scan", "solve", "eigs", "hammerstein", "selftest"}));
    app.add_option("--config", config, "JSON run configuration")->required();
    app.add_option("--out", out, "output prefix (overrides output.prefix)");
    app.add_option("--seed", seed, "seed for randomized instances (overrides the config)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : static_cast<int>(imbed::ExitCode::Config);
    }
    return imbed::run_cli(scenario, config, out, seed, std::cout, std::cerr);
}
