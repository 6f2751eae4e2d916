#pragma once

// Reference computations that share no code with the library: plain Gaussian
// elimination, cofactor adjugates and brute-force sums over index sets.

#include <Eigen/Dense>

#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;

inline Complex det(Matrix m) {
    const auto n = m.rows();
    Complex result = 1.0;
    for (Eigen::Index c = 0; c < n; ++c) {
        Eigen::Index pivot = c;
        for (Eigen::Index r = c + 1; r < n; ++r) {
            if (std::abs(m(r, c)) > std::abs(m(pivot, c))) {
                pivot = r;
            }
        }
        if (m(pivot, c) == Complex{0.0, 0.0}) {
            return 0.0;
        }
        if (pivot != c) {
            m.row(pivot).swap(m.row(c));
            result = -result;
        }
        result *= m(c, c);
        for (Eigen::Index r = c + 1; r < n; ++r) {
            const Complex factor = m(r, c) / m(c, c);
            for (Eigen::Index k = c; k < n; ++k) {
                m(r, k) -= factor * m(c, k);
            }
        }
    }
    return result;
}

inline Matrix minor_of(const Matrix& m, Eigen::Index row, Eigen::Index col) {
    const auto n = m.rows();
    Matrix out(n - 1, n - 1);
    for (Eigen::Index i = 0, oi = 0; i < n; ++i) {
        if (i == row) continue;
        for (Eigen::Index j = 0, oj = 0; j < n; ++j) {
            if (j == col) continue;
            out(oi, oj++) = m(i, j);
        }
        ++oi;
    }
    return out;
}

/// Classical adjugate from cofactors; adj(M)·M = det(M)·I.
inline Matrix adjugate(const Matrix& m) {
    const auto n = m.rows();
    if (n == 1) {
        return Matrix::Identity(1, 1);
    }
    Matrix adj(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double sign = (i + j) % 2 == 0 ? 1.0 : -1.0;
            adj(j, i) = sign * det(minor_of(m, i, j));
        }
    }
    return adj;
}

/// Calls visit(indices) for every strictly increasing k-subset of {0..n-1}.
inline void for_each_subset(int n, int k, const std::function<void(const std::vector<int>&)>& visit) {
    std::vector<int> idx(static_cast<std::size_t>(k));
    std::function<void(int, int)> rec = [&](int pos, int start) {
        if (pos == k) {
            visit(idx);
            return;
        }
        for (int i = start; i < n; ++i) {
            idx[static_cast<std::size_t>(pos)] = i;
            rec(pos + 1, i + 1);
        }
    };
    rec(0, 0);
}

/// Sum of the k×k principal minors: the k-th elementary symmetric polynomial
/// of the eigenvalues.
inline Complex elementary_symmetric(const Matrix& a, int k) {
    if (k == 0) {
        return 1.0;
    }
    Complex sum = 0.0;
    for_each_subset(static_cast<int>(a.rows()), k, [&](const std::vector<int>& s) {
        Matrix sub(k, k);
        for (int r = 0; r < k; ++r) {
            for (int c = 0; c < k; ++c) {
                sub(r, c) = a(s[r], s[c]);
            }
        }
        sum += det(sub);
    });
    return sum;
}

/// (1/k!)·Σ over all index k-tuples of det[X_s(i_r, i_s)] with X_1 = C and
/// X_s = A otherwise: the pairing Tr[C·Tr_{k−1}(Λᵏ A)] written out as a sum of
/// Gram determinants of e_{i_1}∧…∧e_{i_k} against C e_{i_1}∧A e_{i_2}∧….
inline Complex partial_trace_pairing(const Matrix& c, const Matrix& a, int k) {
    const int n = static_cast<int>(a.rows());
    std::vector<int> idx(static_cast<std::size_t>(k), 0);
    Complex sum = 0.0;
    double tuples = 1.0;
    for (int i = 0; i < k; ++i) {
        tuples *= n;
    }
    for (long t = 0; t < static_cast<long>(tuples); ++t) {
        long rest = t;
        for (int i = 0; i < k; ++i) {
            idx[static_cast<std::size_t>(i)] = static_cast<int>(rest % n);
            rest /= n;
        }
        Matrix g(k, k);
        for (int r = 0; r < k; ++r) {
            for (int s = 0; s < k; ++s) {
                const Matrix& x = s == 0 ? c : a;
                g(r, s) = x(idx[static_cast<std::size_t>(r)], idx[static_cast<std::size_t>(s)]);
            }
        }
        sum += det(g);
    }
    double kfact = 1.0;
    for (int i = 2; i <= k; ++i) {
        kfact *= i;
    }
    return sum / kfact;
}

inline double max_abs(const Matrix& m) {
    return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

inline double factorial(int k) {
    double f = 1.0;
    for (int i = 2; i <= k; ++i) {
        f *= i;
    }
    return f;
}

} // namespace oracle
