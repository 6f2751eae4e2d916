#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "imbed/cli.hpp"
#include "imbed/errors.hpp"
#include "imbed/export.hpp"
#include "imbed/random.hpp"
#include "imbed/selftest.hpp"

using namespace imbed;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct TempDir {
    fs::path path;
    TempDir() {
        path = fs::temp_directory_path() / ("imbed_cli_" + std::to_string(SplitMix64(std::random_device{}()).next()));
        fs::create_directories(path);
    }
    ~TempDir() { fs::remove_all(path); }
    std::string file(const std::string& name) const { return (path / name).string(); }
    std::string write(const std::string& name, const json& doc) const {
        std::ofstream(file(name)) << doc.dump();
        return file(name);
    }
};

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

// Rows of a CSV file after the header, split on commas.
std::vector<std::vector<std::string>> csv_rows(const std::string& path) {
    std::istringstream in(slurp(path));
    std::string line;
    std::getline(in, line);
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        std::vector<std::string> cells;
        std::istringstream ls(line);
        std::string cell;
        while (std::getline(ls, cell, ',')) {
            cells.push_back(cell);
        }
        rows.push_back(cells);
    }
    return rows;
}

double num(const std::string& s) {
    return std::strtod(s.c_str(), nullptr);
}

int run_quiet(const std::string& scenario, const std::string& config, const std::optional<std::string>& out,
              std::optional<std::uint64_t> seed = std::nullopt, std::string* err_text = nullptr) {
    std::ostringstream log;
    std::ostringstream err;
    const int code = run_cli(scenario, config, out, seed, log, err);
    if (err_text) {
        *err_text = err.str();
    }
    return code;
}

} // namespace

TEST_CASE("number formatting") {
    CHECK(format_number(3.0) == "3");
    CHECK(format_number(-2.5) == "-2.5");
    CHECK(format_number(0.1) == "0.10000000000000001");
    CHECK(format_number(1e-300) == "1e-300");
    CHECK(format_number(1.0 / 3.0) == "0.33333333333333331");
    CHECK(format_number(std::nan("")) == "nan");
    CHECK(format_number(-INFINITY) == "-inf");
    SplitMix64 rng(3);
    for (int i = 0; i < 1000; ++i) {
        const double x = std::ldexp(rng.uniform(-1.0, 1.0), static_cast<int>(rng.integer(-60, 60)));
        CHECK(std::strtod(format_number(x).c_str(), nullptr) == x);
    }
}

TEST_CASE("operator dumps round-trip") {
    SplitMix64 rng(11);
    for (int dim = 1; dim <= 5; ++dim) {
        const DiscreteOperator op(rng.disc_matrix(dim, 0.5));
        const DiscreteOperator back = operator_from_json(json::parse(operator_to_json(op).dump()));
        CHECK(back.matrix() == op.matrix());
    }
    CHECK_THROWS_AS(operator_from_json(json{{"dim", 2}, {"entries", json::array({{1, 0}})}}), ConfigError);
    CHECK_THROWS_AS(operator_from_json(json{{"dim", 1}, {"entries", json::array({1.0})}}), ConfigError);
    CHECK_THROWS_AS(operator_from_json(json{{"entries", json::array()}}), ConfigError);
    CHECK_THROWS_AS(operator_from_json(json{{"dim", 1}, {"entries", json::array({{"a", 0}})}}), ConfigError);
}

TEST_CASE("config parsing") {
    const json xy{{"kernel", {{"name", "product_xy"}}}, {"grid", {{"n", 8}}}, {"path", {{"waypoints", {0, 2}}}}};
    const RunConfig ok = parse_config(xy, "scan");
    CHECK(ok.kernel.has_value());
    CHECK(ok.grid->size() == 8);
    CHECK(ok.path->back() == Complex(2.0));
    CHECK(ok.output.prefix == "imbed");
    CHECK(ok.output.csv);
    CHECK_FALSE(ok.output.json);

    const json arc{{"kernel", {{"name", "zero"}}}, {"path", {{"arc", {{"from", 0}, {"to", json::array({2, 1})}}}}}};
    CHECK(parse_config(arc, "scan").path->back() == Complex(2.0, 1.0));

    auto bad = [&](const json& patch) {
        json doc = xy;
        doc.merge_patch(patch);
        return doc;
    };
    CHECK_THROWS_AS(parse_config(xy, "dance"), ConfigError);
    CHECK_THROWS_AS(parse_config(json::array(), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"scenario", "eigs"}}), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"kernel", {{"name", "nope"}}}}), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"kernel", {{"name", "sine_product"}, {"n", 1.5}}}}), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"grid", {{"rule", "simpson"}}}}), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"grid", {{"n", 0}}}}), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"grid", {{"b", 2.0}}}}), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"path", {{"waypoints", {1}}}}}), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"path", {{"waypoints", {0, "x"}}}}}), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"integrator", {{"method", "euler"}}}}), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"integrator", {{"rtol", -1}}}}), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"seed", -4}}), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"weighting", "both"}}), "scan"), ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"family", {{"slope", {{"dim", 1}, {"entries", {{1, 0}}}}}}}}), "scan"),
                    ConfigError);
    CHECK_THROWS_AS(parse_config(bad({{"output", {{"formats", {"xml"}}}}}), "scan"), ConfigError);

    TempDir dir;
    CHECK_THROWS_AS(load_config(dir.file("missing.json"), "scan"), IoError);
    std::ofstream(dir.file("broken.json")) << "{\"kernel\": ";
    CHECK_THROWS_AS(load_config(dir.file("broken.json"), "scan"), ConfigError);
}

TEST_CASE("exit codes and error records") {
    CHECK(exit_code_for(SingularityError(2.0, 0.0, "s")) == ExitCode::Singularity);
    CHECK(exit_code_for(NonConvergenceError(1.0, 5, 1e-3, "n")) == ExitCode::NonConvergence);
    CHECK(exit_code_for(StepSizeError(1.0, 1e-13, "h")) == ExitCode::NonConvergence);
    CHECK(exit_code_for(ConsistencyError(1.0, 1e-2, "c")) == ExitCode::NonConvergence);
    CHECK(exit_code_for(IoError("io")) == ExitCode::Io);
    CHECK(exit_code_for(ConfigError("cfg")) == ExitCode::Config);

    const json rec = error_record(SingularityError(Complex(3.0, 0.5), 0.0, "d vanished"));
    CHECK(rec["error_kind"] == "singularity");
    CHECK(rec["lambda"] == json::array({3.0, 0.5}));
    CHECK(rec["message"] == "d vanished");
    CHECK(error_record(ConfigError("x"))["lambda"].is_null());
    CHECK(error_record(NonConvergenceError(1.5, 3, 1.0, "x"))["error_kind"] == "non_convergence");
}

TEST_CASE("scenarios") {
    TempDir dir;
    const std::string out = dir.file("run");

    SUBCASE("eigs finds 3 for the xy kernel") {
        const auto cfg = dir.write("eigs.json", {{"kernel", {{"name", "product_xy"}}},
                                                 {"grid", {{"n", 8}}},
                                                 {"path", {{"waypoints", {0.5, 10}}}},
                                                 {"output", {{"formats", {"csv", "json"}}}}});
        REQUIRE(run_quiet("eigs", cfg, out) == 0);
        const auto rows = csv_rows(out + "_eigenvalues.csv");
        REQUIRE(rows.size() == 1);
        CHECK(std::abs(num(rows[0][1]) - 3.0) < 1e-6);
        const json j = json::parse(slurp(out + "_eigenvalues.json"));
        CHECK(j.at(0).at("eigenvector").size() == 8);
    }
    SUBCASE("scan of a zero family keeps d = 1") {
        const auto cfg = dir.write("scan.json",
                                   {{"family", {{"slope", operator_to_json(DiscreteOperator::zero(3))}}},
                                    {"path", {{"waypoints", {0, 1, json::array({1, 1})}}}},
                                    {"output", {{"formats", {"csv", "json"}}}}});
        REQUIRE(run_quiet("scan", cfg, out) == 0);
        const auto rows = csv_rows(out + "_trajectory.csv");
        CHECK(rows.size() >= 3);
        for (const auto& r : rows) {
            CHECK(r[2] == "1");
            CHECK(r[3] == "0");
        }
        const json j = json::parse(slurp(out + "_trajectory.json"));
        CHECK(j.dump().find("\"D\"") != std::string::npos);
    }
    SUBCASE("solve with the xy kernel") {
        const auto cfg = dir.write("solve.json", {{"kernel", {{"name", "product_xy"}}},
                                                  {"grid", {{"n", 6}}},
                                                  {"solve", {{"lambda", 1}, {"phi", {{"kind", "power"}, {"param", 1}}}}}});
        REQUIRE(run_quiet("solve", cfg, out) == 0);
        const auto rows = csv_rows(out + "_solution.csv");
        REQUIRE(rows.size() == 6);
        for (const auto& r : rows) {
            CHECK(std::abs(num(r[1]) - 1.5 * num(r[0])) < 1e-8);
        }
    }
    SUBCASE("hammerstein continuation and switch") {
        const auto cfg = dir.write(
            "ham.json", {{"kernel", {{"name", "sine_product"}, {"n", 1}}},
                         {"grid", {{"n", 16}}},
                         {"hammerstein",
                          {{"coefficients", {0, 1, 0, 1}},
                           {"lambda_start", 0.5},
                           {"lambda_end", 2.5},
                           {"step", 0.05},
                           {"switch", {{"direction", 1}, {"amplitude", 0.1}, {"lambda_offset", -0.05}, {"lambda_end", 1.8}}}}},
                         {"output", {{"formats", {"csv", "json"}}}}});
        REQUIRE(run_quiet("hammerstein", cfg, out) == 0);
        const auto rows = csv_rows(out + "_branch.csv");
        const auto& last = rows.back();
        CHECK(last[1] == "1");
        CHECK(std::abs(num(last[0]) - 1.8) < 1e-12);
        const json j = json::parse(slurp(out + "_branch.json"));
        REQUIRE(j.at("bifurcations").size() == 1);
        CHECK(std::abs(j["bifurcations"][0]["lambda"].get<double>() - 2.0) < 1e-6);
    }
    SUBCASE("selftest output is reproducible") {
        const auto cfg = dir.write("self.json", {{"selftest", {{"cases", 10}, {"max_dim", 5}}}});
        REQUIRE(run_quiet("selftest", cfg, dir.file("a"), 42) == 0);
        REQUIRE(run_quiet("selftest", cfg, dir.file("b"), 42) == 0);
        REQUIRE(run_quiet("selftest", cfg, dir.file("c"), 43) == 0);
        const std::string a = slurp(dir.file("a_selftest.csv"));
        CHECK(a == slurp(dir.file("b_selftest.csv")));
        CHECK(a != slurp(dir.file("c_selftest.csv")));
        CHECK(a.find(",0\n") == std::string::npos);
        CHECK(csv_rows(dir.file("a_selftest.csv")).size() == 90);
    }
    SUBCASE("failures map to exit codes and leave an error record") {
        std::string err;
        const auto singular = dir.write("sing.json", {{"kernel", {{"name", "product_xy"}}},
                                                      {"grid", {{"n", 6}}},
                                                      {"path", {{"waypoints", {0, 4}}}}});
        CHECK(run_quiet("scan", singular, out, std::nullopt, &err) == 3);
        const json rec = json::parse(slurp(out + "_error.json"));
        CHECK(rec["error_kind"] == "singularity");
        CHECK(std::abs(rec["lambda"][0].get<double>() - 3.0) < 1e-3);
        CHECK(json::parse(err) == rec);

        const auto badk = dir.write("badk.json", {{"kernel", {{"name", "nope"}}}});
        CHECK(run_quiet("scan", badk, out) == 2);
        CHECK(json::parse(slurp(out + "_error.json"))["error_kind"] == "config");

        CHECK(run_quiet("scan", dir.file("absent.json"), out) == 5);
        CHECK(run_quiet("scan", singular, dir.file("no/such/dir/run")) == 3);

        const auto nobracket = dir.write("nob.json", {{"kernel", {{"name", "sine_product"}, {"n", 1}}},
                                                      {"grid", {{"n", 6}}},
                                                      {"hammerstein",
                                                       {{"coefficients", {0, 1, 0, 1}},
                                                        {"lambda_start", 1.8},
                                                        {"lambda_end", 1.9},
                                                        {"step", 0.05},
                                                        {"psi0", 0.4},
                                                        {"max_iters", 1}}}});
        CHECK(run_quiet("hammerstein", nobracket, out) == 4);
        CHECK(json::parse(slurp(out + "_error.json"))["error_kind"] == "non_convergence");
    }
}

TEST_CASE("selftest checks all pass on random operators") {
    const auto checks = run_selftest(7, 20, 6);
    CHECK(checks.size() == 180);
    for (const auto& c : checks) {
        INFO(c.check, " instance ", c.instance, " error ", c.error);
        CHECK(c.pass);
        CHECK(c.error <= c.tolerance);
    }
    std::ostringstream csv;
    write_selftest_csv(csv, checks);
    CHECK(csv.str().rfind("instance,dim,check,error,tolerance,pass\n", 0) == 0);
}
