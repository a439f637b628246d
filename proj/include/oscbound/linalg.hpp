#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

namespace oscbound {

/// Row-major dense double matrix, sized for the small chain levels
/// (a handful of rows, at most a few thousand columns).
struct Mat {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Mat() = default;
    Mat(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

    double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
    [[nodiscard]] double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }
};

inline double frobenius_norm(const Mat& m) {
    long double s = 0.0L;
    for (double v : m.a) s += static_cast<long double>(v) * v;
    return static_cast<double>(std::sqrt(s));
}

/// Singular values by one-sided Jacobi on the thin side, descending.
/// Sweeps rotate column pairs until the off-diagonal Gram mass is below
/// 1e-13 relative; plenty for the desk-scale matrices the chain produces.
inline std::vector<double> singular_values(const Mat& m) {
    for (double v : m.a)
        if (!std::isfinite(v)) throw std::invalid_argument("singular_values: non-finite entry");

    // work on B with rows >= cols so the columns being orthogonalized are tall
    const bool transpose = m.rows < m.cols;
    const int br = transpose ? m.cols : m.rows;
    const int bc = transpose ? m.rows : m.cols;
    std::vector<double> b(static_cast<std::size_t>(br) * bc);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) {
            if (transpose)
                b[static_cast<std::size_t>(j) * bc + i] = m.at(i, j);
            else
                b[static_cast<std::size_t>(i) * bc + j] = m.at(i, j);
        }

    auto col_dot = [&](int p, int q) {
        long double s = 0.0L;
        for (int i = 0; i < br; ++i)
            s += static_cast<long double>(b[static_cast<std::size_t>(i) * bc + p]) *
                 b[static_cast<std::size_t>(i) * bc + q];
        return static_cast<double>(s);
    };

    constexpr double kTol = 1e-13;
    constexpr int kMaxSweeps = 60;
    for (int sweep = 0; sweep < kMaxSweeps; ++sweep) {
        bool rotated = false;
        for (int p = 0; p < bc - 1; ++p) {
            for (int q = p + 1; q < bc; ++q) {
                const double alpha = col_dot(p, p);
                const double beta = col_dot(q, q);
                const double gamma = col_dot(p, q);
                if (std::abs(gamma) <= kTol * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = (zeta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = c * t;
                for (int i = 0; i < br; ++i) {
                    double& bp = b[static_cast<std::size_t>(i) * bc + p];
                    double& bq = b[static_cast<std::size_t>(i) * bc + q];
                    const double vp = bp;
                    bp = c * vp - s * bq;
                    bq = s * vp + c * bq;
                }
            }
        }
        if (!rotated) break;
    }

    std::vector<double> sv(bc);
    for (int p = 0; p < bc; ++p) sv[p] = std::sqrt(std::max(0.0, col_dot(p, p)));
    std::sort(sv.begin(), sv.end(), std::greater<>());
    return sv;
}

/// Product of the r smallest singular values.
inline double smallest_r_product(const Mat& m, int r) {
    const int k = std::min(m.rows, m.cols);
    if (r < 1 || r > k) throw std::out_of_range("smallest_r_product: r out of range");
    const std::vector<double> sv = singular_values(m);
    double p = 1.0;
    for (int i = k - r; i < k; ++i) p *= sv[i];
    return p;
}

/// det(M * M^T) evaluated directly from the Gram matrix (rows <= 3);
/// serves as the independent route the Gram-identity checks compare to.
inline double gram_determinant(const Mat& m) {
    const int r = m.rows;
    if (r > 3) throw std::invalid_argument("gram_determinant supports at most 3 rows");
    long double g[3][3] = {};
    for (int i = 0; i < r; ++i)
        for (int j = 0; j < r; ++j) {
            long double s = 0.0L;
            for (int t = 0; t < m.cols; ++t)
                s += static_cast<long double>(m.at(i, t)) * m.at(j, t);
            g[i][j] = s;
        }
    long double det = 0.0L;
    if (r == 1) {
        det = g[0][0];
    } else if (r == 2) {
        det = g[0][0] * g[1][1] - g[0][1] * g[1][0];
    } else {
        det = g[0][0] * (g[1][1] * g[2][2] - g[1][2] * g[2][1]) -
              g[0][1] * (g[1][0] * g[2][2] - g[1][2] * g[2][0]) +
              g[0][2] * (g[1][0] * g[2][1] - g[1][1] * g[2][0]);
    }
    return static_cast<double>(det);
}

} // namespace oscbound
