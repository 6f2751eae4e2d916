#include "imbed/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "imbed/errors.hpp"
#include "imbed/export.hpp"
#include "imbed/hammerstein.hpp"
#include "imbed/selftest.hpp"

namespace imbed {

using nlohmann::json;

namespace {

const char* const kScenarios[] = {"scan", "solve", "eigs", "hammerstein", "selftest"};

double number(const json& j, const char* key, double fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j.at(key).is_number()) {
        throw ConfigError(std::string("'") + key + "' must be a number");
    }
    return j.at(key).get<double>();
}

int integer(const json& j, const char* key, int fallback) {
    if (!j.contains(key)) {
        return fallback;
    }
    if (!j.at(key).is_number_integer()) {
        throw ConfigError(std::string("'") + key + "' must be an integer");
    }
    return j.at(key).get<int>();
}

// A number or an [re, im] pair.
Complex complex_value(const json& j, const std::string& what) {
    if (j.is_number()) {
        return j.get<double>();
    }
    if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
        return {j[0].get<double>(), j[1].get<double>()};
    }
    throw ConfigError(what + " must be a number or an [re, im] pair");
}

ScalarFunction scalar_function(const json& j) {
    const std::string kind = j.value("kind", "");
    const double param = number(j, "param", 1.0);
    if (kind == "constant") return ScalarFunction::constant(param);
    if (kind == "power") return ScalarFunction::power(param);
    if (kind == "sin_pi") return ScalarFunction::sin_pi(param);
    if (kind == "cos_pi") return ScalarFunction::cos_pi(param);
    if (kind == "exp") return ScalarFunction::exp(param);
    throw ConfigError("unknown function kind '" + kind + "'");
}

KernelSpec parse_kernel(const json& j, const std::string& base_dir) {
    if (!j.is_object()) {
        throw ConfigError("'kernel' must be an object");
    }
    const std::string name = j.value("name", "");
    const double a = number(j, "a", 0.0);
    const double b = number(j, "b", 1.0);
    try {
        if (name == "product_xy") return KernelSpec::product_xy(a, b);
        if (name == "sine_product") return KernelSpec::sine_product(integer(j, "n", 1), a, b);
        if (name == "exponential_absdiff") return KernelSpec::exponential_absdiff(number(j, "c", 1.0), a, b);
        if (name == "zero") return KernelSpec::zero(a, b);
        if (name == "separable") {
            std::vector<std::pair<ScalarFunction, ScalarFunction>> terms;
            for (const auto& t : j.at("terms")) {
                terms.emplace_back(scalar_function(t.at("u")), scalar_function(t.at("v")));
            }
            return KernelSpec::separable(std::move(terms), a, b);
        }
        if (name == "tabulated") {
            std::filesystem::path file = j.at("file").get<std::string>();
            if (file.is_relative()) {
                file = std::filesystem::path(base_dir) / file;
            }
            return j.contains("a") || j.contains("b") ? KernelSpec::tabulated_from_csv(file.string(), a, b)
                                                      : KernelSpec::tabulated_from_csv(file.string());
        }
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("kernel: ") + e.what());
    }
    throw ConfigError("unknown kernel '" + name + "'");
}

QuadratureGrid parse_grid(const json& j, const KernelSpec& kernel) {
    const std::string rule = j.value("rule", "gauss_legendre");
    const int n = integer(j, "n", 16);
    const double a = number(j, "a", kernel.a());
    const double b = number(j, "b", kernel.b());
    try {
        if (rule == "gauss_legendre") return QuadratureGrid::gauss_legendre(n, a, b);
        if (rule == "trapezoid") return QuadratureGrid::trapezoid(n, a, b);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("grid: ") + e.what());
    }
    throw ConfigError("unknown quadrature rule '" + rule + "'");
}

LambdaPath parse_path(const json& j) {
    try {
        if (j.contains("arc")) {
            const json& arc = j.at("arc");
            const std::string side = arc.value("side", "left");
            if (side != "left" && side != "right") {
                throw ConfigError("arc side must be 'left' or 'right'");
            }
            return LambdaPath::arc(complex_value(arc.at("from"), "arc.from"), complex_value(arc.at("to"), "arc.to"),
                                   side == "left" ? LambdaPath::Side::Left : LambdaPath::Side::Right,
                                   integer(arc, "pieces", 48));
        }
        std::vector<Complex> points;
        for (const auto& w : j.at("waypoints")) {
            points.push_back(complex_value(w, "waypoint"));
        }
        return LambdaPath(std::move(points));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("path: ") + e.what());
    }
}

IntegratorConfig parse_integrator(const json& j) {
    IntegratorConfig cfg;
    const std::string method = j.value("method", "rk45");
    if (method == "rk45") {
        Rk45Adaptive m;
        m.rtol = number(j, "rtol", m.rtol);
        m.atol = number(j, "atol", m.atol);
        m.min_step = number(j, "min_step", m.min_step);
        cfg.method = m;
    } else if (method == "rk4") {
        cfg.method = Rk4Fixed{integer(j, "steps_per_segment", Rk4Fixed{}.steps_per_segment)};
    } else {
        throw ConfigError("unknown integrator method '" + method + "'");
    }
    cfg.singularity_threshold = number(j, "singularity_threshold", cfg.singularity_threshold);
    cfg.consistency_tol = number(j, "consistency_tol", cfg.consistency_tol);
    cfg.renormalize_every = integer(j, "renormalize_every", cfg.renormalize_every);
    try {
        cfg.validate();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("integrator: ") + e.what());
    }
    return cfg;
}

OutputSpec parse_output(const json& j) {
    OutputSpec out;
    out.prefix = j.value("prefix", out.prefix);
    if (j.contains("formats")) {
        out.csv = out.json = false;
        for (const auto& f : j.at("formats")) {
            const std::string name = f.get<std::string>();
            if (name == "csv") {
                out.csv = true;
            } else if (name == "json") {
                out.json = true;
            } else {
                throw ConfigError("unknown output format '" + name + "'");
            }
        }
    }
    return out;
}

std::string dump(const json& j) {
    return j.dump(2) + "\n";
}

// f(λ) for the configured problem.
OperatorFamily family_of(const RunConfig& cfg) {
    if (cfg.family) {
        return *cfg.family;
    }
    return discretize(*cfg.kernel, *cfg.grid, cfg.weighting);
}

void require_operator(const RunConfig& cfg) {
    if (!cfg.family && !cfg.kernel) {
        throw ConfigError("scenario '" + cfg.scenario + "' needs a 'kernel' or a 'family'");
    }
}

const LambdaPath& require_path(const RunConfig& cfg) {
    if (!cfg.path) {
        throw ConfigError("scenario '" + cfg.scenario + "' needs a 'path'");
    }
    return *cfg.path;
}

ExitCode run_scan(const RunConfig& cfg, std::ostream& log) {
    require_operator(cfg);
    const LambdaPath& path = require_path(cfg);
    const OperatorFamily family = family_of(cfg);
    ImbeddingState state = initialize_at(family, path.front(), cfg.integrator);
    std::vector<ImbeddingState> samples{state};
    std::vector<ImbeddingState> snapshots{state};
    const auto& w = path.waypoints();
    for (std::size_t i = 1; i < w.size(); ++i) {
        auto leg = integrate_path(family, LambdaPath::segment(w[i - 1], w[i]), state, cfg.integrator);
        samples.insert(samples.end(), leg.begin() + 1, leg.end());
        state = leg.back();
        snapshots.push_back(state);
    }
    if (cfg.output.csv) {
        std::ostringstream csv;
        write_trajectory_csv(csv, samples);
        write_file(cfg.output.prefix + "_trajectory.csv", csv.str());
    }
    if (cfg.output.json) {
        write_file(cfg.output.prefix + "_trajectory.json", dump(trajectory_json(samples, snapshots)));
    }
    log << "scan: " << samples.size() << " samples, d(" << state.lambda << ") = " << state.d << "\n";
    return ExitCode::Ok;
}

ExitCode run_solve(const RunConfig& cfg, std::ostream& log) {
    require_operator(cfg);
    const json& p = cfg.params;
    if (!p.contains("lambda")) {
        throw ConfigError("solve: 'lambda' is required");
    }
    const Complex lambda = complex_value(p.at("lambda"), "solve.lambda");
    const OperatorFamily family = family_of(cfg);
    const Index n = family.dim();
    Vector phi(n);
    std::vector<double> nodes;
    if (cfg.grid) {
        nodes = cfg.grid->nodes();
    } else {
        for (Index i = 0; i < n; ++i) {
            nodes.push_back(static_cast<double>(i));
        }
    }
    const json phi_spec = p.value("phi", json{{"kind", "constant"}, {"param", 1.0}});
    if (phi_spec.is_array()) {
        if (static_cast<Index>(phi_spec.size()) != n) {
            throw ConfigError("solve: 'phi' needs one value per node");
        }
        for (Index i = 0; i < n; ++i) {
            phi(i) = complex_value(phi_spec[static_cast<std::size_t>(i)], "solve.phi entry");
        }
    } else {
        if (!cfg.grid) {
            throw ConfigError("solve: a function 'phi' needs a kernel grid; give sampled values instead");
        }
        const ScalarFunction f = scalar_function(phi_spec);
        for (Index i = 0; i < n; ++i) {
            phi(i) = f(nodes[static_cast<std::size_t>(i)]);
        }
    }

    Vector psi;
    if (cfg.kernel && cfg.weighting == Weighting::OneSided) {
        psi = solve_fredholm(*cfg.kernel, *cfg.grid, lambda, phi, cfg.integrator);
    } else {
        const ImbeddingState state = initialize_at(family, lambda, cfg.integrator);
        psi = solve(state, phi, cfg.integrator.singularity_threshold);
    }
    if (cfg.output.csv) {
        std::ostringstream csv;
        csv << "x,psi_re,psi_im\n";
        for (Index i = 0; i < n; ++i) {
            csv << format_number(nodes[static_cast<std::size_t>(i)]) << ',' << format_number(psi(i).real()) << ','
                << format_number(psi(i).imag()) << '\n';
        }
        write_file(cfg.output.prefix + "_solution.csv", csv.str());
    }
    if (cfg.output.json) {
        json values = json::array();
        for (Index i = 0; i < n; ++i) {
            values.push_back({{"x", nodes[static_cast<std::size_t>(i)]}, {"psi", complex_to_json(psi(i))}});
        }
        write_file(cfg.output.prefix + "_solution.json",
                   dump(json{{"lambda", complex_to_json(lambda)}, {"solution", std::move(values)}}));
    }
    log << "solve: " << n << " nodes at lambda = " << lambda << "\n";
    return ExitCode::Ok;
}

ExitCode run_eigs(const RunConfig& cfg, std::ostream& log) {
    require_operator(cfg);
    const LambdaPath& path = require_path(cfg);
    const json& p = cfg.params;
    ScanOptions options;
    options.samples = integer(p, "samples", options.samples);
    options.detour_radius = number(p, "detour_radius", options.detour_radius);
    options.max_refine_iterations = integer(p, "max_refine_iterations", options.max_refine_iterations);
    const double refine_tol = number(p, "refine_tol", 1e-10);
    const auto pairs = find_eigenvalues(family_of(cfg), path, cfg.integrator, refine_tol, options);
    if (cfg.output.csv) {
        std::ostringstream csv;
        csv << "index,lambda_re,lambda_im,d_re,d_im\n";
        for (std::size_t i = 0; i < pairs.size(); ++i) {
            csv << i << ',' << format_number(pairs[i].lambda.real()) << ','
                << format_number(pairs[i].lambda.imag()) << ',' << format_number(pairs[i].d.real()) << ','
                << format_number(pairs[i].d.imag()) << '\n';
        }
        write_file(cfg.output.prefix + "_eigenvalues.csv", csv.str());
    }
    if (cfg.output.json) {
        json out = json::array();
        for (const auto& e : pairs) {
            json v = json::array();
            for (Index i = 0; i < e.eigenvector.size(); ++i) {
                v.push_back(complex_to_json(e.eigenvector(i)));
            }
            out.push_back({{"lambda", complex_to_json(e.lambda)}, {"d", complex_to_json(e.d)}, {"eigenvector", v}});
        }
        write_file(cfg.output.prefix + "_eigenvalues.json", dump(out));
    }
    log << "eigs: " << pairs.size() << " eigenvalue(s)\n";
    return ExitCode::Ok;
}

// F(ψ) = Σ c_k ψ^k.
struct Polynomial {
    std::vector<double> c;
    Complex operator()(double, Complex psi) const {
        Complex v = 0.0;
        for (auto it = c.rbegin(); it != c.rend(); ++it) {
            v = v * psi + *it;
        }
        return v;
    }
    Complex slope(double, Complex psi) const {
        Complex v = 0.0;
        for (std::size_t k = c.size(); k-- > 1;) {
            v = v * psi + static_cast<double>(k) * c[k];
        }
        return v;
    }
};

ExitCode run_hammerstein(const RunConfig& cfg, std::ostream& log) {
    if (!cfg.kernel) {
        throw ConfigError("hammerstein: a 'kernel' is required");
    }
    const json& p = cfg.params;
    Polynomial poly;
    if (!p.contains("coefficients") || !p.at("coefficients").is_array() || p.at("coefficients").empty()) {
        throw ConfigError("hammerstein: 'coefficients' of F(psi) = sum c_k psi^k are required");
    }
    for (const auto& c : p.at("coefficients")) {
        if (!c.is_number()) {
            throw ConfigError("hammerstein: coefficients must be numbers");
        }
        poly.c.push_back(c.get<double>());
    }
    if (!p.contains("lambda_start") || !p.contains("lambda_end") || !p.contains("step")) {
        throw ConfigError("hammerstein: 'lambda_start', 'lambda_end' and 'step' are required");
    }
    const NonlinearProblem problem(
        *cfg.kernel, *cfg.grid, [poly](double y, Complex psi) { return poly(y, psi); },
        [poly](double y, Complex psi) { return poly.slope(y, psi); });

    ContinuationConfig cc;
    cc.newton_tol = number(p, "newton_tol", cc.newton_tol);
    cc.max_iters = integer(p, "max_iters", cc.max_iters);
    cc.bifurcation_tol = number(p, "bifurcation_tol", cc.bifurcation_tol);
    cc.locate_tol = number(p, "locate_tol", cc.locate_tol);
    cc.integrator = cfg.integrator;

    const Vector psi0 = Vector::Constant(problem.dim(), number(p, "psi0", 0.0));
    const double step = number(p, "step", 0.0);
    if (step == 0.0) {
        throw ConfigError("hammerstein: 'step' must be nonzero");
    }
    BranchResult trivial;
    try {
        trivial = continue_branch(problem, number(p, "lambda_start", 0.0), number(p, "lambda_end", 0.0), step,
                                  psi0, cc);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("hammerstein: ") + e.what());
    }
    std::vector<ContinuationState> rows = trivial.states;
    json bifurcations = json::array();
    for (const auto& b : trivial.bifurcations) {
        bifurcations.push_back({{"lambda", b.lambda},
                                {"bracket", json::array({b.bracket_lo, b.bracket_hi})},
                                {"d_lin", complex_to_json(b.state.d_lin)}});
    }

    if (p.contains("switch") && !trivial.bifurcations.empty()) {
        const json& s = p.at("switch");
        const double offset = number(s, "lambda_offset", -step);
        const ContinuationState start =
            branch_switch(problem, trivial.bifurcations.front().state, integer(s, "direction", 1),
                          number(s, "amplitude", 0.1), offset, cc);
        if (s.contains("lambda_end") && start.branch_id != trivial.bifurcations.front().state.branch_id) {
            const double end = number(s, "lambda_end", start.lambda);
            const double branch_step = end < start.lambda ? -std::abs(step) : std::abs(step);
            const auto branch = continue_branch(problem, start.lambda, end, branch_step, start.psi, cc,
                                                start.branch_id);
            rows.insert(rows.end(), branch.states.begin(), branch.states.end());
        } else {
            rows.push_back(start);
        }
    }
    if (cfg.output.csv) {
        std::ostringstream csv;
        write_branch_csv(csv, rows);
        write_file(cfg.output.prefix + "_branch.csv", csv.str());
    }
    if (cfg.output.json) {
        write_file(cfg.output.prefix + "_branch.json",
                   dump(json{{"states", branch_json(rows)}, {"bifurcations", bifurcations}}));
    }
    log << "hammerstein: " << rows.size() << " states, " << trivial.bifurcations.size() << " bifurcation(s)";
    for (const auto& b : trivial.bifurcations) {
        log << " lambda* = " << format_number(b.lambda);
    }
    log << "\n";
    return ExitCode::Ok;
}

ExitCode run_selftest_scenario(const RunConfig& cfg, std::ostream& log) {
    const int cases = integer(cfg.params, "cases", 50);
    const int max_dim = integer(cfg.params, "max_dim", 8);
    if (cases < 1 || max_dim < 1) {
        throw ConfigError("selftest: 'cases' and 'max_dim' must be positive");
    }
    const auto checks = run_selftest(cfg.seed, cases, max_dim);
    std::size_t failed = 0;
    for (const auto& c : checks) {
        failed += c.pass ? 0 : 1;
    }
    std::ostringstream csv;
    write_selftest_csv(csv, checks);
    // The CSV is the selftest's contract, so it is written whatever the formats say.
    write_file(cfg.output.prefix + "_selftest.csv", csv.str());
    log << "selftest: " << checks.size() - failed << "/" << checks.size() << " checks passed (seed " << cfg.seed
        << ")\n";
    return failed == 0 ? ExitCode::Ok : ExitCode::SelftestFailed;
}

} // namespace

RunConfig parse_config(const json& doc, const std::string& scenario, const std::string& base_dir) {
    if (std::find(std::begin(kScenarios), std::end(kScenarios), scenario) == std::end(kScenarios)) {
        throw ConfigError("unknown scenario '" + scenario + "'");
    }
    if (!doc.is_object()) {
        throw ConfigError("config must be a JSON object");
    }
    if (doc.contains("scenario") && doc.at("scenario") != scenario) {
        throw ConfigError("config is for scenario '" + doc.at("scenario").get<std::string>() + "', not '" +
                          scenario + "'");
    }
    RunConfig cfg;
    cfg.scenario = scenario;
    try {
        if (doc.contains("kernel") && doc.contains("family")) {
            throw ConfigError("give either 'kernel' or 'family', not both");
        }
        if (doc.contains("kernel")) {
            cfg.kernel = parse_kernel(doc.at("kernel"), base_dir);
            cfg.grid = parse_grid(doc.value("grid", json::object()), *cfg.kernel);
            const std::string w = doc.value("weighting", "one_sided");
            if (w == "symmetrized") {
                cfg.weighting = Weighting::Symmetrized;
            } else if (w != "one_sided") {
                throw ConfigError("unknown weighting '" + w + "'");
            }
        }
        if (doc.contains("family")) {
            const json& f = doc.at("family");
            const DiscreteOperator slope = operator_from_json(f.at("slope"));
            if (f.contains("offset")) {
                const DiscreteOperator offset = operator_from_json(f.at("offset"));
                if (offset.dim() != slope.dim()) {
                    throw ConfigError("family: offset and slope dimensions differ");
                }
                cfg.family = OperatorFamily::affine(offset, slope);
            } else {
                cfg.family = OperatorFamily::linear(slope);
            }
        }
        if (doc.contains("path")) {
            cfg.path = parse_path(doc.at("path"));
        }
        cfg.integrator = parse_integrator(doc.value("integrator", json::object()));
        cfg.output = parse_output(doc.value("output", json::object()));
        if (doc.contains("seed")) {
            if (!doc.at("seed").is_number_unsigned()) {
                throw ConfigError("'seed' must be a non-negative integer");
            }
            cfg.seed = doc.at("seed").get<std::uint64_t>();
        }
        cfg.params = doc.value(scenario, json::object());
        if (!cfg.params.is_object()) {
            throw ConfigError("'" + scenario + "' section must be an object");
        }
        if (cfg.kernel) {
            // Surface a grid/kernel interval mismatch as a config problem.
            discretize(*cfg.kernel, *cfg.grid, cfg.weighting);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    } catch (const DomainMismatchError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

RunConfig load_config(const std::string& path, const std::string& scenario) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open config '" + path + "'");
    }
    json doc;
    try {
        doc = json::parse(in);
    } catch (const json::parse_error& e) {
        throw ConfigError("config '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(doc, scenario, std::filesystem::path(path).parent_path().string());
}

ExitCode run(const RunConfig& cfg, std::ostream& log) {
    if (cfg.scenario == "scan") return run_scan(cfg, log);
    if (cfg.scenario == "solve") return run_solve(cfg, log);
    if (cfg.scenario == "eigs") return run_eigs(cfg, log);
    if (cfg.scenario == "hammerstein") return run_hammerstein(cfg, log);
    if (cfg.scenario == "selftest") return run_selftest_scenario(cfg, log);
    throw ConfigError("unknown scenario '" + cfg.scenario + "'");
}

ExitCode exit_code_for(const std::exception& e) {
    if (dynamic_cast<const SingularityError*>(&e)) return ExitCode::Singularity;
    if (dynamic_cast<const NonConvergenceError*>(&e) || dynamic_cast<const StepSizeError*>(&e) ||
        dynamic_cast<const ConsistencyError*>(&e) || dynamic_cast<const NoBracketError*>(&e)) {
        return ExitCode::NonConvergence;
    }
    if (dynamic_cast<const IoError*>(&e)) return ExitCode::Io;
    return ExitCode::Config;
}

json error_record(const std::exception& e) {
    std::string kind = "config";
    json lambda = nullptr;
    if (const auto* s = dynamic_cast<const SingularityError*>(&e)) {
        kind = "singularity";
        lambda = complex_to_json(s->lambda());
    } else if (const auto* n = dynamic_cast<const NonConvergenceError*>(&e)) {
        kind = "non_convergence";
        lambda = complex_to_json(n->lambda());
    } else if (const auto* st = dynamic_cast<const StepSizeError*>(&e)) {
        kind = "step_size";
        lambda = complex_to_json(st->lambda());
    } else if (const auto* c = dynamic_cast<const ConsistencyError*>(&e)) {
        kind = "consistency";
        lambda = complex_to_json(c->lambda());
    } else if (dynamic_cast<const NoBracketError*>(&e)) {
        kind = "no_bracket";
    } else if (dynamic_cast<const IoError*>(&e)) {
        kind = "io";
    } else if (dynamic_cast<const DomainMismatchError*>(&e)) {
        kind = "domain_mismatch";
    } else if (dynamic_cast<const std::invalid_argument*>(&e)) {
        kind = "invalid_argument";
    }
    return json{{"error_kind", kind}, {"lambda", lambda}, {"message", e.what()}};
}

int run_cli(const std::string& scenario, const std::string& config_path, const std::optional<std::string>& out,
            const std::optional<std::uint64_t>& seed, std::ostream& log, std::ostream& err) {
    std::optional<std::string> prefix = out;
    try {
        RunConfig cfg = load_config(config_path, scenario);
        if (out) {
            cfg.output.prefix = *out;
        }
        prefix = cfg.output.prefix;
        if (seed) {
            cfg.seed = *seed;
        }
        return static_cast<int>(run(cfg, log));
    } catch (const std::exception& e) {
        const json record = error_record(e);
        err << record.dump() << "\n";
        if (prefix) {
            try {
                write_file(*prefix + "_error.json", dump(record));
            } catch (const IoError&) {
                // The record already went to stderr.
            }
        }
        return static_cast<int>(exit_code_for(e));
    }
}

} // namespace imbed
