#pragma once

// Tensor-product Chebyshev interpolation on a cube, used to tabulate the
// smooth two-scale convolution coefficients near the origin.

#include <vector>

#include "vpl/common.hpp"

namespace vpl {

struct ChebAxis {
    double center = 0, half = 1;
    std::vector<double> nodes;   // Chebyshev points mapped to [c-a, c+a]
    std::vector<double> wbary;   // barycentric weights

    ChebAxis() = default;
    ChebAxis(int N, double c, double a) : center(c), half(a), nodes(N), wbary(N) {
        for (int k = 0; k < N; ++k) {
            const double t = std::cos(M_PI * (k + 0.5) / N);  // Chebyshev (first kind) points
            nodes[k] = c + a * t;
            wbary[k] = (k % 2 == 0 ? 1.0 : -1.0) * std::sin(M_PI * (k + 0.5) / N);
        }
    }
};

// interpolate a set of lines: values[line][k] over axis nodes -> out[line][j] at targets
inline void cheb_interp_lines(const ChebAxis& ax, const std::vector<double>& targets,
                              const std::vector<double>& values, std::int64_t nlines,
                              std::vector<double>& out) {
    const int N = static_cast<int>(ax.nodes.size());
    const std::int64_t nt = static_cast<std::int64_t>(targets.size());
    out.assign(static_cast<std::size_t>(nlines * nt), 0.0);
    // precompute barycentric factors per target
    std::vector<double> fac(static_cast<std::size_t>(nt) * N);
    std::vector<int> exact(static_cast<std::size_t>(nt), -1);
    for (std::int64_t j = 0; j < nt; ++j) {
        double denom = 0;
        for (int k = 0; k < N; ++k) {
            const double d = targets[static_cast<std::size_t>(j)] - ax.nodes[k];
            if (std::abs(d) < 1e-14 * std::max(1.0, std::abs(ax.nodes[k]))) {
                exact[static_cast<std::size_t>(j)] = k;
                break;
            }
            const double f = ax.wbary[k] / d;
            fac[static_cast<std::size_t>(j) * N + k] = f;
            denom += f;
        }
        if (exact[static_cast<std::size_t>(j)] < 0)
            for (int k = 0; k < N; ++k) fac[static_cast<std::size_t>(j) * N + k] /= denom;
    }
    for (std::int64_t l = 0; l < nlines; ++l) {
        const double* src = values.data() + l * N;
        double* dst = out.data() + l * nt;
        for (std::int64_t j = 0; j < nt; ++j) {
            const int ek = exact[static_cast<std::size_t>(j)];
            if (ek >= 0) {
                dst[j] = src[ek];
                continue;
            }
            double acc = 0;
            const double* f = fac.data() + static_cast<std::size_t>(j) * N;
            for (int k = 0; k < N; ++k) acc += f[k] * src[k];
            dst[j] = acc;
        }
    }
}

// Evaluate a function sampled on an N^3 Chebyshev tensor grid at an n^3 tensor
// target grid by successive 1D barycentric interpolation.
// values layout: [i][j][k] over (axis0, axis1, axis2) Chebyshev nodes.
inline std::vector<double> cheb_tensor_eval(const ChebAxis& ax, const std::vector<double>& values,
                                            const std::vector<double>& targets) {
    const int N = static_cast<int>(ax.nodes.size());
    const std::int64_t n = static_cast<std::int64_t>(targets.size());
    // axis 2: [N*N, N] -> [N*N, n]
    std::vector<double> s1;
    cheb_interp_lines(ax, targets, values, static_cast<std::int64_t>(N) * N, s1);
    // transpose to put axis1 last: s1 is [i][j][t2]; we need lines over j
    std::vector<double> s1t(s1.size());
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j)
            for (std::int64_t t = 0; t < n; ++t)
                s1t[(static_cast<std::size_t>(i) * n + t) * N + j] = s1[(static_cast<std::size_t>(i) * N + j) * n + t];
    std::vector<double> s2;
    cheb_interp_lines(ax, targets, s1t, static_cast<std::int64_t>(N) * n, s2);
    // s2 is [i][t2][t1]; lines over i
    std::vector<double> s2t(s2.size());
    for (int i = 0; i < N; ++i)
        for (std::int64_t t2 = 0; t2 < n; ++t2)
            for (std::int64_t t1 = 0; t1 < n; ++t1)
                s2t[(static_cast<std::size_t>(t2) * n + t1) * N + i] = s2[(static_cast<std::size_t>(i) * n + t2) * n + t1];
    std::vector<double> s3;
    cheb_interp_lines(ax, targets, s2t, n * n, s3);
    // s3 is [t2][t1][t0]; reorder to [t0][t1][t2]
    std::vector<double> out(s3.size());
    for (std::int64_t t2 = 0; t2 < n; ++t2)
        for (std::int64_t t1 = 0; t1 < n; ++t1)
            for (std::int64_t t0 = 0; t0 < n; ++t0)
                out[(static_cast<std::size_t>(t0) * n + t1) * n + t2] = s3[(static_cast<std::size_t>(t2) * n + t1) * n + t0];
    return out;
}

}  // namespace vpl
