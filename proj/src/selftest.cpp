#include "imbed/selftest.hpp"

#include <cmath>
#include <stdexcept>

#include "imbed/errors.hpp"
#include "imbed/export.hpp"
#include "imbed/random.hpp"

namespace imbed {

namespace {

double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) {
        f *= i;
    }
    return f;
}

} // namespace

std::vector<SelftestCheck> run_selftest(std::uint64_t seed, int cases, int max_dim) {
    if (cases < 1 || max_dim < 1) {
        throw std::invalid_argument("run_selftest: need cases >= 1 and max_dim >= 1");
    }
    SplitMix64 rng(seed);
    std::vector<SelftestCheck> checks;
    IntegratorConfig cfg;

    for (int c = 0; c < cases; ++c) {
        const int dim = rng.integer(1, max_dim);
        const DiscreteOperator a(rng.disc_matrix(dim, 0.5));
        const Matrix identity = Matrix::Identity(dim, dim);
        const Eigen::PartialPivLU<Matrix> lu(identity + a.matrix());
        const Complex det = lu.determinant();
        const Matrix adj = det * lu.inverse();
        const double scale = 1.0 + std::abs(det);
        auto add = [&](const std::string& name, double error, double tol) {
            checks.push_back({c, dim, name, error, tol, error < tol});
        };

        const auto series = fredholm_det_series(a, 1e-15);
        add("det_series_vs_lu", std::abs(series.value - det) / std::max(1e-300, std::abs(det)), 1e-9);

        const auto e = exterior_power_traces(a, dim);
        Complex sum = 0.0;
        for (const Complex& ek : e) {
            sum += ek;
        }
        add("exterior_sum_vs_det", std::abs(sum - det) / scale, 1e-9);

        const Matrix d_hat = d_operator_series(a).matrix();
        add("d_series_vs_adjugate", max_abs(d_hat - adj) / scale, 1e-9);
        add("d_series_right_inverse", max_abs(d_hat * (identity + a.matrix()) - det * identity) / scale, 1e-9);

        Matrix partial_sum = Matrix::Zero(dim, dim);
        for (int k = 1; k <= dim + 1; ++k) {
            partial_sum += static_cast<double>(k) * partial_trace(a, k).matrix();
        }
        add("partial_trace_sum", max_abs(partial_sum - d_hat) / scale, 1e-9);

        double beta_err = 0.0;
        for (int k = 1; k <= dim; ++k) {
            const Matrix expected = factorial(k) * a.matrix() * partial_trace(a, k).matrix();
            beta_err = std::max(beta_err, max_abs(plemelj_smithies_beta(a, k).matrix() - expected) /
                                              (factorial(k) * scale));
        }
        add("beta_vs_partial_trace", beta_err, 1e-9);

        const ImbeddingState boot = initialize_at(OperatorFamily::linear(a), 1.0, cfg);
        add("bootstrap_det", std::abs(boot.d - det) / scale, 1e-7);
        add("bootstrap_d_operator", max_abs(boot.D.matrix() - adj) / scale, 1e-7);
        add("bootstrap_consistency", boot.residual, cfg.consistency_tol);
    }
    return checks;
}

void write_selftest_csv(std::ostream& out, const std::vector<SelftestCheck>& checks) {
    out << "instance,dim,check,error,tolerance,pass\n";
    for (const auto& c : checks) {
        out << c.instance << ',' << c.dim << ',' << c.check << ',' << format_number(c.error) << ','
            << format_number(c.tolerance) << ',' << (c.pass ? 1 : 0) << '\n';
    }
}

} // namespace imbed
