#include "imbed/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "imbed/errors.hpp"

namespace imbed {

double ScalarFunction::operator()(double x) const {
    switch (kind) {
    case Kind::Constant:
        return param;
    case Kind::Power:
        return std::pow(x, param);
    case Kind::SinPi:
        return std::sin(param * std::numbers::pi * x);
    case Kind::CosPi:
        return std::cos(param * std::numbers::pi * x);
    case Kind::Exp:
        return std::exp(param * x);
    }
    return 0.0;
}

namespace {

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require(bool ok, const std::string& what) {
    if (!ok) {
        throw std::invalid_argument("KernelSpec: " + what);
    }
}

bool strictly_increasing(const std::vector<double>& v) {
    return std::adjacent_find(v.begin(), v.end(), std::greater_equal<>()) == v.end();
}

// Index i with grid[i] ≤ t ≤ grid[i+1].
std::size_t cell(const std::vector<double>& grid, double t) {
    if (grid.size() == 1) {
        return 0;
    }
    auto it = std::upper_bound(grid.begin(), grid.end(), t);
    std::size_t i = it == grid.begin() ? 0 : static_cast<std::size_t>(it - grid.begin()) - 1;
    return std::min(i, grid.size() - 2);
}

double bilinear(const KernelSpec::Tabulated& t, double x, double y) {
    const double eps = 1e-12 * (1.0 + std::abs(x) + std::abs(y));
    if (x < t.x.front() - eps || x > t.x.back() + eps || y < t.y.front() - eps || y > t.y.back() + eps) {
        throw std::out_of_range("KernelSpec: point outside the tabulated range");
    }
    const std::size_t i = cell(t.x, x);
    const std::size_t j = cell(t.y, y);
    if (t.x.size() == 1 && t.y.size() == 1) {
        return t.values(0, 0);
    }
    auto frac = [](const std::vector<double>& g, std::size_t k, double v) {
        return g.size() == 1 ? 0.0 : std::clamp((v - g[k]) / (g[k + 1] - g[k]), 0.0, 1.0);
    };
    const double fx = frac(t.x, i, x);
    const double fy = frac(t.y, j, y);
    const auto ii = static_cast<Eigen::Index>(i);
    const auto jj = static_cast<Eigen::Index>(j);
    const Eigen::Index i1 = t.x.size() == 1 ? ii : ii + 1;
    const Eigen::Index j1 = t.y.size() == 1 ? jj : jj + 1;
    return (1 - fx) * (1 - fy) * t.values(ii, jj) + fx * (1 - fy) * t.values(i1, jj) +
           (1 - fx) * fy * t.values(ii, j1) + fx * fy * t.values(i1, j1);
}

} // namespace

KernelSpec::KernelSpec(Kind kind, double a, double b) : kind_(std::move(kind)), a_(a), b_(b) {
    require(std::isfinite(a_) && std::isfinite(b_) && a_ < b_, "domain must satisfy a < b");
    std::visit(overloaded{
                   [](const ProductXY&) {},
                   [](const SineProduct&) {},
                   [](const ExponentialAbsDiff& k) { require(std::isfinite(k.c), "c must be finite"); },
                   [](const Separable& k) {
                       for (const auto& [u, v] : k.terms) {
                           require(std::isfinite(u.param) && std::isfinite(v.param),
                                   "separable parameters must be finite");
                       }
                   },
                   [this](const Tabulated& k) {
                       require(!k.x.empty() && !k.y.empty(), "tabulated grid is empty");
                       require(strictly_increasing(k.x) && strictly_increasing(k.y),
                               "tabulated grids must be strictly increasing");
                       require(k.values.rows() == static_cast<Eigen::Index>(k.x.size()) &&
                                   k.values.cols() == static_cast<Eigen::Index>(k.y.size()),
                               "tabulated values do not match the grid");
                       require(k.values.allFinite(), "tabulated values must be finite");
                       require(a_ >= std::max(k.x.front(), k.y.front()) - 1e-12 &&
                                   b_ <= std::min(k.x.back(), k.y.back()) + 1e-12,
                               "domain extends beyond the tabulated range");
                   },
               },
               kind_);
}

KernelSpec KernelSpec::product_xy(double a, double b) {
    return KernelSpec(ProductXY{}, a, b);
}

KernelSpec KernelSpec::sine_product(int n, double a, double b) {
    return KernelSpec(SineProduct{n}, a, b);
}

KernelSpec KernelSpec::exponential_absdiff(double c, double a, double b) {
    return KernelSpec(ExponentialAbsDiff{c}, a, b);
}

KernelSpec KernelSpec::separable(std::vector<std::pair<ScalarFunction, ScalarFunction>> terms, double a,
                                 double b) {
    return KernelSpec(Separable{std::move(terms)}, a, b);
}

KernelSpec KernelSpec::zero(double a, double b) {
    return separable({}, a, b);
}

KernelSpec KernelSpec::tabulated(std::vector<double> x, std::vector<double> y, Eigen::MatrixXd values,
                                 double a, double b) {
    if (!(a < b) && !x.empty() && !y.empty()) {
        a = std::max(x.front(), y.front());
        b = std::min(x.back(), y.back());
    }
    return KernelSpec(Tabulated{std::move(x), std::move(y), std::move(values)}, a, b);
}

KernelSpec KernelSpec::tabulated_from_csv(const std::string& path, double a, double b) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open kernel table '" + path + "'");
    }
    auto split = [](const std::string& line) {
        std::vector<std::string> cells;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ',')) {
            cells.push_back(cell);
        }
        return cells;
    };
    auto number = [&path](const std::string& s) {
        try {
            std::size_t used = 0;
            const double v = std::stod(s, &used);
            if (s.find_first_not_of(" \t\r", used) != std::string::npos) {
                throw std::invalid_argument(s);
            }
            return v;
        } catch (const std::exception&) {
            throw ConfigError("kernel table '" + path + "': bad number '" + s + "'");
        }
    };

    std::string line;
    if (!std::getline(in, line)) {
        throw ConfigError("kernel table '" + path + "' is empty");
    }
    const auto header = split(line);
    if (header.size() < 2) {
        throw ConfigError("kernel table '" + path + "': header needs at least one y-node");
    }
    std::vector<double> y;
    for (std::size_t j = 1; j < header.size(); ++j) {
        y.push_back(number(header[j]));
    }
    std::vector<double> x;
    std::vector<std::vector<double>> rows;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos) {
            continue;
        }
        const auto cells = split(line);
        if (cells.size() != header.size()) {
            throw ConfigError("kernel table '" + path + "': ragged row");
        }
        x.push_back(number(cells[0]));
        std::vector<double> row;
        for (std::size_t j = 1; j < cells.size(); ++j) {
            row.push_back(number(cells[j]));
        }
        rows.push_back(std::move(row));
    }
    Eigen::MatrixXd values(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) {
            values(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
        }
    }
    try {
        return tabulated(std::move(x), std::move(y), std::move(values), a, b);
    } catch (const std::invalid_argument& e) {
        throw ConfigError("kernel table '" + path + "': " + e.what());
    }
}

double KernelSpec::operator()(double x, double y) const {
    return std::visit(overloaded{
                          [&](const ProductXY&) { return x * y; },
                          [&](const SineProduct& k) {
                              return std::sin(k.n * std::numbers::pi * x) * std::sin(k.n * std::numbers::pi * y);
                          },
                          [&](const ExponentialAbsDiff& k) { return std::exp(-k.c * std::abs(x - y)); },
                          [&](const Separable& k) {
                              double sum = 0.0;
                              for (const auto& [u, v] : k.terms) {
                                  sum += u(x) * v(y);
                              }
                              return sum;
                          },
                          [&](const Tabulated& k) { return bilinear(k, x, y); },
                      },
                      kind_);
}

std::string KernelSpec::name() const {
    return std::visit(overloaded{
                          [](const ProductXY&) { return std::string("product_xy"); },
                          [](const SineProduct&) { return std::string("sine_product"); },
                          [](const ExponentialAbsDiff&) { return std::string("exponential_absdiff"); },
                          [](const Separable&) { return std::string("separable"); },
                          [](const Tabulated&) { return std::string("tabulated"); },
                      },
                      kind_);
}

bool KernelSpec::symmetric() const {
    return std::visit(overloaded{
                          [](const ProductXY&) { return true; },
                          [](const SineProduct&) { return true; },
                          [](const ExponentialAbsDiff&) { return true; },
                          [](const Separable& k) { return k.terms.empty(); },
                          [](const Tabulated& k) {
                              return k.x == k.y && k.values.isApprox(k.values.transpose(), 0.0);
                          },
                      },
                      kind_);
}

} // namespace imbed
