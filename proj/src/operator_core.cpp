#include "imbed/operator_core.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace imbed {

DiscreteOperator::DiscreteOperator(Matrix entries) : entries_(std::move(entries)) {
    if (entries_.rows() < 1 || entries_.rows() != entries_.cols()) {
        throw std::invalid_argument("DiscreteOperator: expected a non-empty square matrix, got " +
                                    std::to_string(entries_.rows()) + "x" +
                                    std::to_string(entries_.cols()));
    }
    if (!entries_.allFinite()) {
        throw std::invalid_argument("DiscreteOperator: entries must be finite");
    }
}

DiscreteOperator DiscreteOperator::identity(Index dim) {
    return DiscreteOperator(Matrix::Identity(dim, dim));
}

DiscreteOperator DiscreteOperator::zero(Index dim) {
    return DiscreteOperator(Matrix::Zero(dim, dim));
}

Complex trace(const DiscreteOperator& a) {
    return a.matrix().trace();
}

double trace_norm(const DiscreteOperator& a) {
    Eigen::JacobiSVD<Matrix> svd(a.matrix());
    return svd.singularValues().sum();
}

std::vector<Complex> power_traces(const DiscreteOperator& a, int max_power) {
    if (max_power < 0) {
        throw std::invalid_argument("power_traces: max_power must be non-negative");
    }
    std::vector<Complex> traces(static_cast<std::size_t>(max_power) + 1);
    traces[0] = static_cast<double>(a.dim());
    Matrix power = a.matrix();
    for (int m = 1; m <= max_power; ++m) {
        traces[m] = power.trace();
        if (m < max_power) {
            power = power * a.matrix();
        }
    }
    return traces;
}

namespace {

std::vector<Complex> elementary_from_power_traces(const std::vector<Complex>& p, int max_order,
                                                  Index dim) {
    std::vector<Complex> e(static_cast<std::size_t>(max_order) + 1, Complex{0.0, 0.0});
    e[0] = 1.0;
    for (int k = 1; k <= max_order; ++k) {
        if (k > dim) {
            break;
        }
        Complex sum{0.0, 0.0};
        for (int m = 1; m <= k; ++m) {
            const double sign = (m % 2 == 1) ? 1.0 : -1.0;
            sum += sign * p[m] * e[k - m];
        }
        e[k] = sum / static_cast<double>(k);
    }
    return e;
}

} // namespace

std::vector<Complex> exterior_power_traces(const DiscreteOperator& a, int max_order) {
    if (max_order < 0) {
        throw std::invalid_argument("exterior_power_traces: order must be non-negative");
    }
    const int needed = static_cast<int>(std::min<Index>(max_order, a.dim()));
    return elementary_from_power_traces(power_traces(a, needed), max_order, a.dim());
}

Complex exterior_power_trace(const DiscreteOperator& a, int k) {
    if (k < 0) {
        throw std::invalid_argument("exterior_power_trace: k must be non-negative");
    }
    if (k > a.dim()) {
        return {0.0, 0.0};
    }
    return exterior_power_traces(a, k)[k];
}

DiscreteOperator partial_trace(const DiscreteOperator& a, int k) {
    if (k < 1) {
        throw std::invalid_argument("partial_trace: k must be at least 1");
    }
    const auto e = exterior_power_traces(a, k - 1);
    const Index n = a.dim();
    Matrix result = Matrix::Zero(n, n);
    Matrix power = Matrix::Identity(n, n); // A^{m-1}
    for (int m = 1; m <= k; ++m) {
        const double sign = (m % 2 == 1) ? 1.0 : -1.0;
        result += (sign * e[k - m]) * power;
        if (m < k) {
            power = power * a.matrix();
        }
    }
    return DiscreteOperator(result / static_cast<double>(k));
}

ScalarSeriesReport fredholm_det_series(const DiscreteOperator& a, double tol) {
    if (!(tol > 0.0)) {
        throw std::invalid_argument("fredholm_det_series: tol must be positive");
    }
    const Index n = a.dim();
    const double norm = trace_norm(a);
    const auto e = exterior_power_traces(a, static_cast<int>(n));

    // Tail Σ_{j>k} Mʲ/j!, summed directly to avoid cancellation against e^M.
    auto tail_bound = [norm](int k) {
        if (norm == 0.0) {
            return 0.0;
        }
        double term = 1.0;
        for (int j = 1; j <= k + 1; ++j) {
            term *= norm / j;
        }
        double sum = 0.0;
        for (int j = k + 1; j < k + 100000; ++j) {
            sum += term;
            if (!std::isfinite(sum)) {
                return sum;
            }
            if (norm / (j + 1) < 1.0 && term <= sum * 1e-17) {
                break;
            }
            term *= norm / (j + 1);
        }
        return sum;
    };

    ScalarSeriesReport report;
    Complex sum{0.0, 0.0};
    for (int k = 0; k <= n; ++k) {
        sum += e[k];
        report.terms_used = k + 1;
        report.truncation_bound = tail_bound(k);
        if (report.truncation_bound < tol) {
            break;
        }
    }
    report.value = sum;
    return report;
}

DiscreteOperator d_operator_series(const DiscreteOperator& a) {
    // Σ_{k=1}^{n+1} k·Tr_{k−1}[Λᵏ] = Σ_{j=0}^{n} c_j Aʲ with
    // c_j = (−1)ʲ Σ_{i=0}^{n−j} Tr[Λⁱ]; evaluated by Horner's rule.
    const Index n = a.dim();
    const auto e = exterior_power_traces(a, static_cast<int>(n));
    std::vector<Complex> coeff(static_cast<std::size_t>(n) + 1);
    Complex partial{0.0, 0.0};
    std::vector<Complex> prefix(static_cast<std::size_t>(n) + 1);
    for (Index i = 0; i <= n; ++i) {
        partial += e[i];
        prefix[i] = partial;
    }
    for (Index j = 0; j <= n; ++j) {
        const double sign = (j % 2 == 0) ? 1.0 : -1.0;
        coeff[j] = sign * prefix[n - j];
    }
    Matrix result = coeff[n] * Matrix::Identity(n, n);
    for (Index j = n - 1; j >= 0; --j) {
        result = result * a.matrix();
        result.diagonal().array() += coeff[j];
    }
    return DiscreteOperator(result);
}

Matrix power_trace_matrix(const std::vector<Complex>& p, int k) {
    Matrix s = Matrix::Zero(k, k);
    for (int i = 0; i < k; ++i) {
        s(i, 0) = p[i + 1];
        if (i + 1 < k) {
            s(i, i + 1) = static_cast<double>(k - 1 - i);
        }
        for (int j = 1; j <= i; ++j) {
            s(i, j) = p[i - j + 1];
        }
    }
    return s;
}

DiscreteOperator plemelj_smithies_beta(const DiscreteOperator& a, int k) {
    if (k < 1) {
        throw std::invalid_argument("plemelj_smithies_beta: k must be at least 1");
    }
    const Index n = a.dim();
    const auto p = power_traces(a, k);
    const Matrix s = power_trace_matrix(p, k);

    Matrix result = Matrix::Zero(n, n);
    Matrix power = a.matrix();
    for (int m = 0; m < k; ++m) {
        Complex cofactor{1.0, 0.0};
        if (k > 1) {
            Matrix minor(k - 1, k - 1);
            for (int i = 0, r = 0; i < k; ++i) {
                if (i == m) {
                    continue;
                }
                minor.row(r++) = s.row(i).tail(k - 1);
            }
            cofactor = minor.determinant();
        }
        const double sign = (m % 2 == 0) ? 1.0 : -1.0;
        result += (sign * cofactor) * power;
        if (m + 1 < k) {
            power = power * a.matrix();
        }
    }
    return DiscreteOperator(result);
}

double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

} // namespace imbed
