#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>

#include "imbed/errors.hpp"
#include "imbed/fredholm_frontend.hpp"
#include "oracles.hpp"

using namespace imbed;

namespace {

Complex det_of(const OperatorFamily& family, Complex lambda) {
    const Index n = family.dim();
    return oracle::det(Matrix::Identity(n, n) + family.f(lambda).matrix());
}

std::string temp_file(const std::string& name, const std::string& text) {
    const auto path = std::filesystem::temp_directory_path() / ("imbed_frontend_" + name);
    std::ofstream(path) << text;
    return path.string();
}

} // namespace

TEST_CASE("Gauss-Legendre and trapezoid grids") {
    for (int n : {1, 2, 5, 16, 40}) {
        const auto g = QuadratureGrid::gauss_legendre(n, -1.0, 2.0);
        double sum = 0.0;
        for (double w : g.weights()) {
            CHECK(w > 0.0);
            sum += w;
        }
        CHECK(std::abs(sum - 3.0) < 1e-12);
        // Exact for degree 2n − 1.
        const int degree = 2 * n - 1;
        double integral = 0.0;
        for (int i = 0; i < n; ++i) {
            integral += g.weights()[i] * std::pow(g.nodes()[i], degree);
        }
        const double exact = (std::pow(2.0, degree + 1) - std::pow(-1.0, degree + 1)) / (degree + 1);
        CHECK(std::abs(integral - exact) < 1e-11 * std::max(1.0, std::abs(exact)));
        for (int i = 1; i < n; ++i) {
            CHECK(g.nodes()[i] > g.nodes()[i - 1]);
        }
    }
    const auto t = QuadratureGrid::trapezoid(5);
    CHECK(t.nodes().front() == 0.0);
    CHECK(t.nodes().back() == 1.0);
    CHECK(t.weights().front() == doctest::Approx(0.125));
    CHECK(t.rule() == QuadratureGrid::Rule::Trapezoid);
    CHECK_THROWS_AS(QuadratureGrid::gauss_legendre(0), std::invalid_argument);
    CHECK_THROWS_AS(QuadratureGrid::trapezoid(1), std::invalid_argument);
    CHECK_THROWS_AS(QuadratureGrid::gauss_legendre(4, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("kernels") {
    CHECK(KernelSpec::product_xy()(0.5, 0.4) == doctest::Approx(0.2));
    CHECK(KernelSpec::sine_product(1)(0.5, 0.5) == doctest::Approx(1.0));
    CHECK(KernelSpec::exponential_absdiff(2.0)(0.1, 0.6) == doctest::Approx(std::exp(-1.0)));
    CHECK(KernelSpec::zero()(0.3, 0.9) == 0.0);
    const auto sep = KernelSpec::separable(
        {{ScalarFunction::power(2), ScalarFunction::constant(3)}, {ScalarFunction::exp(1), ScalarFunction::cos_pi(1)}});
    CHECK(sep(0.5, 0.0) == doctest::Approx(0.75 + std::exp(0.5)));
    CHECK_FALSE(sep.symmetric());
    CHECK(KernelSpec::product_xy().symmetric());
    CHECK(KernelSpec::sine_product(2).name() == "sine_product");
    CHECK_THROWS_AS(KernelSpec::product_xy(1.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(KernelSpec::exponential_absdiff(std::nan("")), std::invalid_argument);

    SUBCASE("tabulated kernels interpolate bilinearly") {
        // K = 1 + x + 2y + xy is reproduced exactly by bilinear interpolation.
        std::vector<double> x{0.0, 0.4, 1.0};
        std::vector<double> y{0.0, 0.5, 1.0};
        Eigen::MatrixXd v(3, 3);
        for (int i = 0; i < 3; ++i) {
            for (int j = 0; j < 3; ++j) {
                v(i, j) = 1 + x[i] + 2 * y[j] + x[i] * y[j];
            }
        }
        const auto k = KernelSpec::tabulated(x, y, v);
        CHECK(k.a() == 0.0);
        CHECK(k.b() == 1.0);
        CHECK(k(0.3, 0.7) == doctest::Approx(1 + 0.3 + 1.4 + 0.21));
        CHECK_THROWS_AS(k(1.5, 0.2), std::out_of_range);
        CHECK_THROWS_AS(KernelSpec::tabulated({0.0, 0.0}, y, Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
        CHECK_THROWS_AS(KernelSpec::tabulated(x, y, Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);
    }

    SUBCASE("tabulated kernels load from CSV") {
        const auto path = temp_file("ok.csv", "x\\y,0,1\n0,1,2\n1,3,4\n");
        const auto k = KernelSpec::tabulated_from_csv(path);
        CHECK(k(0.5, 0.5) == doctest::Approx(2.5));
        CHECK_THROWS_AS(KernelSpec::tabulated_from_csv(temp_file("ragged.csv", "x,0,1\n0,1\n")), ConfigError);
        CHECK_THROWS_AS(KernelSpec::tabulated_from_csv(temp_file("nan.csv", "x,0,1\n0,1,abc\n1,2,3\n")), ConfigError);
        CHECK_THROWS_AS(KernelSpec::tabulated_from_csv("/nonexistent/kernel.csv"), IoError);
    }
}

TEST_CASE("discretize") {
    const auto grid = QuadratureGrid::gauss_legendre(16);
    const auto xy = discretize(KernelSpec::product_xy(), grid);
    CHECK(xy.dim() == 16);
    CHECK(std::abs(trace(xy.f(1.0)) + 1.0 / 3.0) < 1e-14);
    CHECK(trace_norm(xy.f(1.0)) < 1.0);
    CHECK(max_abs(xy.f(0.0).matrix()) == 0.0);
    CHECK(max_abs(xy.df(0.7).matrix() - xy.f(1.0).matrix()) < 1e-15);

    const auto sine = discretize(KernelSpec::sine_product(1), grid);
    for (double lambda : {0.5, 1.0, 1.7, 3.0}) {
        CHECK(std::abs(det_of(sine, lambda) - (1.0 - lambda / 2.0)) < 1e-10);
    }

    SUBCASE("the two weightings are similar and the symmetrized one is symmetric") {
        const auto kernel = KernelSpec::exponential_absdiff(1.5);
        const auto one = discretize(kernel, QuadratureGrid::trapezoid(11), Weighting::OneSided);
        const auto sym = discretize(kernel, QuadratureGrid::trapezoid(11), Weighting::Symmetrized);
        const Matrix f = sym.f(1.0).matrix();
        CHECK(oracle::max_abs(f - f.transpose()) < 1e-12);
        for (Complex lambda : {Complex(0.4), Complex(2.0, 1.0)}) {
            CHECK(std::abs(det_of(one, lambda) - det_of(sym, lambda)) < 1e-12);
        }
    }

    SUBCASE("domain mismatch") {
        CHECK_THROWS_AS(discretize(KernelSpec::product_xy(0.0, 2.0), grid), DomainMismatchError);
        CHECK_THROWS_AS(classical_imbedding_march(KernelSpec::product_xy(), QuadratureGrid::gauss_legendre(4, 0, 2),
                                                  1.0, IntegratorConfig{}),
                        DomainMismatchError);
    }

    SUBCASE("polynomial kernel is integrated exactly from two nodes on") {
        for (int n : {2, 3, 8}) {
            const auto family = discretize(KernelSpec::product_xy(), QuadratureGrid::gauss_legendre(n));
            const auto s = initialize_at(family, 1.0, IntegratorConfig{});
            CHECK(std::abs(det_of(family, 1.0) - 2.0 / 3.0) < 1e-12);
            CHECK(std::abs(s.d - 2.0 / 3.0) < 1e-8);
        }
    }
}

TEST_CASE("classical imbedding march") {
    const IntegratorConfig cfg;
    SUBCASE("zero kernel") {
        for (const auto& s : classical_imbedding_march(KernelSpec::zero(), QuadratureGrid::gauss_legendre(6), 2.0, cfg)) {
            CHECK(s.d == Complex(1.0));
            CHECK(oracle::max_abs(s.D) == 0.0);
        }
    }
    SUBCASE("xy kernel at lambda = 1") {
        const auto states =
            classical_imbedding_march(KernelSpec::product_xy(), QuadratureGrid::gauss_legendre(8), 1.0, cfg);
        CHECK(states.front().lambda == Complex(0.0));
        CHECK(std::abs(states.back().lambda - 1.0) < 1e-15);
        CHECK(std::abs(states.back().d - 2.0 / 3.0) < 1e-8);
        // D(x, y, λ) = xy for the rank-one kernel.
        const auto grid = QuadratureGrid::gauss_legendre(8);
        CHECK(std::abs(states.back().D(2, 5) - grid.nodes()[2] * grid.nodes()[5]) < 1e-8);
    }
    SUBCASE("xy kernel aborts at its eigenvalue") {
        try {
            classical_imbedding_march(KernelSpec::product_xy(), QuadratureGrid::gauss_legendre(8), 4.0, cfg);
            FAIL("expected a SingularityError");
        } catch (const SingularityError& e) {
            CHECK(std::abs(e.lambda() - 3.0) < 1e-3);
        }
    }
    SUBCASE("the march can leave the real axis") {
        const auto path = LambdaPath::arc(0.0, 4.0);
        const auto states =
            classical_imbedding_march(KernelSpec::product_xy(), QuadratureGrid::gauss_legendre(6), path, cfg);
        CHECK(std::abs(states.back().d - (1.0 - 4.0 / 3.0)) < 1e-7);
        CHECK_THROWS_AS(
            classical_imbedding_march(KernelSpec::product_xy(), QuadratureGrid::gauss_legendre(6),
                                      LambdaPath::segment(1.0, 2.0), cfg),
            std::invalid_argument);
    }
}

TEST_CASE("classical and generalized formulations correspond") {
    const IntegratorConfig cfg;
    SUBCASE("zero kernel") {
        const auto r = correspondence_check(KernelSpec::zero(), QuadratureGrid::gauss_legendre(5), 1.0, cfg);
        CHECK(r.kernel_residual == 0.0);
        CHECK(r.determinant_residual == 0.0);
        CHECK(r.resolvent_residual == 0.0);
    }
    SUBCASE("xy kernel at lambda = 1, n = 16") {
        const auto r = correspondence_check(KernelSpec::product_xy(), QuadratureGrid::gauss_legendre(16), 1.0, cfg);
        CHECK(r.kernel_residual < 1e-7);
        CHECK(r.determinant_residual < 1e-7);
        CHECK(r.resolvent_residual < 1e-7);
        CHECK(std::abs(r.d_classical - 2.0 / 3.0) < 1e-7);
    }
    SUBCASE("exponential kernel at lambda = 0.5, n = 24") {
        const auto r =
            correspondence_check(KernelSpec::exponential_absdiff(1.0), QuadratureGrid::gauss_legendre(24), 0.5, cfg);
        CHECK(r.kernel_residual < 1e-6);
        CHECK(r.determinant_residual < 1e-6);
        CHECK(r.resolvent_residual < 1e-6);
    }
    SUBCASE("every builtin kernel along a path avoiding eigenvalues") {
        const auto grid = QuadratureGrid::gauss_legendre(12);
        const LambdaPath path({0.0, 0.5, 1.0, Complex(1.0, 1.0)});
        for (const auto& kernel : {KernelSpec::product_xy(), KernelSpec::sine_product(1), KernelSpec::sine_product(2),
                                   KernelSpec::exponential_absdiff(1.0)}) {
            const auto reports = correspondence_check(kernel, grid, path, cfg);
            CHECK(reports.size() == 3);
            for (const auto& r : reports) {
                CHECK(r.determinant_residual < 1e-6);
                CHECK(r.kernel_residual < 1e-6);
                CHECK(r.resolvent_residual < 1e-6);
            }
        }
    }
}

TEST_CASE("Fredholm solutions") {
    const IntegratorConfig cfg;
    const auto grid = QuadratureGrid::gauss_legendre(10);
    const auto& x = grid.nodes();
    const auto xy = KernelSpec::product_xy();

    auto residual = [&](const KernelSpec& k, Complex lambda, const Vector& psi, const Vector& phi) {
        const Matrix kw = kernel_matrix(k, grid) * Eigen::Map<const Eigen::VectorXd>(grid.weights().data(), 10)
                                                      .cast<Complex>()
                                                      .asDiagonal();
        return (psi - lambda * kw * psi - phi).cwiseAbs().maxCoeff();
    };

    SUBCASE("lambda = 0 returns phi") {
        const Vector phi = Vector::LinSpaced(10, 1.0, 2.0);
        CHECK((solve_fredholm(xy, grid, 0.0, phi, cfg) - phi).norm() == 0.0);
    }
    SUBCASE("xy kernel closed forms") {
        const Vector psi = solve_fredholm(xy, grid, 1.0, [](double t) { return Complex(t); }, cfg);
        const Vector psi1 = solve_fredholm(xy, grid, 1.0, [](double) { return Complex(1.0); }, cfg);
        for (int i = 0; i < 10; ++i) {
            CHECK(std::abs(psi(i) - 1.5 * x[i]) < 1e-8);
            CHECK(std::abs(psi1(i) - (1.0 + 0.75 * x[i])) < 1e-8);
        }
    }
    SUBCASE("discrete residual stays below 1e-8 |phi|") {
        const auto kernel = KernelSpec::exponential_absdiff(1.0);
        const Vector phi = Vector::LinSpaced(10, -1.0, 3.0);
        for (Complex lambda : {Complex(0.7), Complex(5.0), Complex(2.0, -1.5)}) {
            const Vector psi = solve_fredholm(kernel, grid, lambda, phi, cfg);
            CHECK(residual(kernel, lambda, psi, phi) < 1e-8 * phi.cwiseAbs().maxCoeff());
        }
    }
    SUBCASE("beyond an eigenvalue, reached around it") {
        const Vector psi = solve_fredholm(xy, grid, 4.0, [](double t) { return Complex(t); }, cfg);
        for (int i = 0; i < 10; ++i) {
            CHECK(std::abs(psi(i) + 3.0 * x[i]) < 1e-7);
        }
    }
    SUBCASE("at an eigenvalue") {
        CHECK_THROWS_AS(solve_fredholm(KernelSpec::sine_product(1), grid, 2.0, Vector::Ones(10), cfg),
                        SingularityError);
        CHECK_THROWS_AS(solve_fredholm(xy, grid, 1.0, Vector::Ones(3), cfg), std::invalid_argument);
    }
}
