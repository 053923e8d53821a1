#pragma once

// Reference computations written without the library's solvers, used as
// independent oracles in the unit tests.

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <vector>

namespace oracle {

using Mat = std::vector<std::vector<double>>;

inline Mat to_mat(const Eigen::MatrixXd& m) {
    Mat out(m.rows(), std::vector<double>(m.cols()));
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
    return out;
}

// Cyclic Jacobi rotations for a symmetric matrix; eigenvalues ascending.
inline std::vector<double> jacobi_eigenvalues(Mat a) {
    const std::size_t n = a.size();
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += a[p][q] * a[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                if (std::abs(a[p][q]) < 1e-300) continue;
                const double theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0), s = t * c;
                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a[k][p], akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a[p][k], aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    std::vector<double> ev(n);
    for (std::size_t i = 0; i < n; ++i) ev[i] = a[i][i];
    std::sort(ev.begin(), ev.end());
    return ev;
}

// Characteristic polynomial coefficients c[0..n] of det(lambda I - A),
// c[0] = 1, by the Faddeev-LeVerrier recursion.
inline std::vector<double> characteristic_polynomial(const Mat& a) {
    const std::size_t n = a.size();
    std::vector<double> c(n + 1, 0.0);
    c[0] = 1.0;
    Mat m(n, std::vector<double>(n, 0.0));  // M_0 = 0
    for (std::size_t k = 1; k <= n; ++k) {
        // M_k = A M_{k-1} + c_{k-1} I
        Mat next(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                double s = 0.0;
                for (std::size_t l = 0; l < n; ++l) s += a[i][l] * m[l][j];
                next[i][j] = s + (i == j ? c[k - 1] : 0.0);
            }
        m = next;
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t l = 0; l < n; ++l) tr += a[i][l] * m[l][i];
        c[k] = -tr / static_cast<double>(k);
    }
    return c;
}

// All roots of the monic polynomial c by Durand-Kerner, polished by Newton.
inline std::vector<std::complex<double>> polynomial_roots(const std::vector<double>& c) {
    using C = std::complex<double>;
    const std::size_t n = c.size() - 1;
    auto eval = [&](C z) {
        C v = c[0];
        for (std::size_t k = 1; k <= n; ++k) v = v * z + c[k];
        return v;
    };
    auto deriv = [&](C z) {
        C v = static_cast<double>(n) * c[0];
        for (std::size_t k = 1; k < n; ++k) v = v * z + static_cast<double>(n - k) * c[k];
        return v;
    };
    double radius = 1.0;
    for (std::size_t k = 1; k <= n; ++k) radius = std::max(radius, 1.0 + std::abs(c[k]));
    std::vector<C> z(n);
    const C seed(0.4, 0.9);
    for (std::size_t k = 0; k < n; ++k) z[k] = radius * std::pow(seed, static_cast<double>(k));
    for (int it = 0; it < 2000; ++it) {
        double change = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            C den = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) den *= (z[i] - z[j]);
            const C step = eval(z[i]) / den;
            z[i] -= step;
            change = std::max(change, std::abs(step));
        }
        if (change < 1e-15) break;
    }
    for (auto& r : z) {
        for (int it = 0; it < 5; ++it) {
            const C d = deriv(r);
            if (std::abs(d) < 1e-12) break;
            r -= eval(r) / d;
        }
    }
    return z;
}

// Direct transcription of the tensor-form field with four nested loops.
// a(i, k, j, l): gain from agent k / option l onto agent i / option j.
inline Eigen::MatrixXd tensor_field(const Eigen::MatrixXd& z, const std::function<double(int, int, int, int)>& a,
                                    const Eigen::VectorXd& d, const Eigen::VectorXd& u, const Eigen::MatrixXd& b,
                                    const std::function<double(double)>& s1,
                                    const std::function<double(double)>& s2) {
    const int n = static_cast<int>(z.rows()), m = static_cast<int>(z.cols());
    Eigen::MatrixXd f(n, m);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < m; ++j) {
            double same = 0.0;
            for (int k = 0; k < n; ++k) same += a(i, k, j, j) * z(k, j);
            double cross = 0.0;
            for (int l = 0; l < m; ++l) {
                if (l == j) continue;
                double y = 0.0;
                for (int k = 0; k < n; ++k) y += a(i, k, j, l) * z(k, l);
                cross += s2(y);
            }
            f(i, j) = -d(i) * z(i, j) + u(i) * (s1(same) + cross) + b(i, j);
        }
        const double mean = f.row(i).sum() / m;
        for (int j = 0; j < m; ++j) f(i, j) -= mean;
    }
    return f;
}

}  // namespace oracle
