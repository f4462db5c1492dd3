#pragma once

// Small shared pieces: 3-vectors, symmetric 3x3 matrices, deterministic
// reductions, and the thread-count knob used by the hot loops.

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace vpl {

using vec3 = std::array<double, 3>;

inline double dot(const vec3& a, const vec3& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2];
}
inline double norm2(const vec3& a) { return dot(a, a); }
inline double norm(const vec3& a) { return std::sqrt(norm2(a)); }
inline vec3 operator+(const vec3& a, const vec3& b) { return {a[0] + b[0], a[1] + b[1], a[2] + b[2]}; }
inline vec3 operator-(const vec3& a, const vec3& b) { return {a[0] - b[0], a[1] - b[1], a[2] - b[2]}; }
inline vec3 operator*(double s, const vec3& a) { return {s * a[0], s * a[1], s * a[2]}; }

// <v> = sqrt(1+|v|^2)
inline double jbracket(const vec3& v) { return std::sqrt(1.0 + norm2(v)); }
inline double jbracket(double r2) { return std::sqrt(1.0 + r2); }

// Symmetric 3x3 stored as (xx, yy, zz, xy, xz, yz).
struct sym3 {
    std::array<double, 6> a{};

    double& xx() { return a[0]; }
    double& yy() { return a[1]; }
    double& zz() { return a[2]; }
    double& xy() { return a[3]; }
    double& xz() { return a[4]; }
    double& yz() { return a[5]; }

    double operator()(int i, int j) const {
        static constexpr int map[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
        return a[map[i][j]];
    }
    void set(int i, int j, double v) {
        static constexpr int map[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
        a[map[i][j]] = v;
    }
    double trace() const { return a[0] + a[1] + a[2]; }
    vec3 apply(const vec3& u) const {
        return {a[0] * u[0] + a[3] * u[1] + a[4] * u[2],
                a[3] * u[0] + a[1] * u[1] + a[5] * u[2],
                a[4] * u[0] + a[5] * u[1] + a[2] * u[2]};
    }
    double quad(const vec3& u) const { return dot(u, apply(u)); }
    sym3& operator+=(const sym3& o) {
        for (int k = 0; k < 6; ++k) a[k] += o.a[k];
        return *this;
    }
    sym3& operator*=(double s) {
        for (int k = 0; k < 6; ++k) a[k] *= s;
        return *this;
    }
};

inline sym3 operator*(double s, const sym3& m) {
    sym3 r = m;
    r *= s;
    return r;
}
inline sym3 operator+(const sym3& m, const sym3& n) {
    sym3 r = m;
    r += n;
    return r;
}

// Eigenvalues of sym3 via the standard trigonometric solution.
inline std::array<double, 3> eigenvalues(const sym3& m) {
    const double p1 = m(0, 1) * m(0, 1) + m(0, 2) * m(0, 2) + m(1, 2) * m(1, 2);
    const double q = m.trace() / 3.0;
    if (p1 < 1e-300) {
        std::array<double, 3> e{m(0, 0), m(1, 1), m(2, 2)};
        std::sort(e.begin(), e.end());
        return e;
    }
    const double d0 = m(0, 0) - q, d1 = m(1, 1) - q, d2 = m(2, 2) - q;
    const double p2 = d0 * d0 + d1 * d1 + d2 * d2 + 2.0 * p1;
    const double p = std::sqrt(p2 / 6.0);
    // B = (M - q I)/p, r = det(B)/2 clamped to [-1,1]
    const double b00 = d0 / p, b11 = d1 / p, b22 = d2 / p;
    const double b01 = m(0, 1) / p, b02 = m(0, 2) / p, b12 = m(1, 2) / p;
    double r = b00 * (b11 * b22 - b12 * b12) - b01 * (b01 * b22 - b12 * b02) + b02 * (b01 * b12 - b11 * b02);
    r *= 0.5;
    r = std::clamp(r, -1.0, 1.0);
    const double phi = std::acos(r) / 3.0;
    const double e1 = q + 2.0 * p * std::cos(phi);
    const double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
    const double e2 = 3.0 * q - e1 - e3;
    std::array<double, 3> e{e1, e2, e3};
    std::sort(e.begin(), e.end());
    return e;
}

// ---- threading -------------------------------------------------------------

inline int& thread_count() {
    static int n = 1;
    return n;
}

inline void set_threads(int n) {
    thread_count() = n > 0 ? n : 1;
#ifdef _OPENMP
    omp_set_num_threads(thread_count());
#endif
}

template <class F>
inline void parallel_for(std::int64_t lo, std::int64_t hi, F&& body) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static) num_threads(thread_count())
#endif
    for (std::int64_t i = lo; i < hi; ++i) body(i);
}

// ---- deterministic reductions ----------------------------------------------
//
// Sums are accumulated in fixed-size blocks and combined pairwise in index
// order, so the result does not depend on the thread count.

inline double block_sum(std::span<const double> x) {
    constexpr std::size_t kBlock = 1024;
    const std::size_t nb = (x.size() + kBlock - 1) / kBlock;
    if (nb <= 1) {
        double s = 0.0;
        for (double v : x) s += v;
        return s;
    }
    std::vector<double> partial(nb, 0.0);
    for (std::size_t b = 0; b < nb; ++b) {
        const std::size_t lo = b * kBlock, hi = std::min(x.size(), lo + kBlock);
        double s = 0.0;
        for (std::size_t i = lo; i < hi; ++i) s += x[i];
        partial[b] = s;
    }
    // pairwise tree
    std::size_t m = nb;
    while (m > 1) {
        std::size_t half = (m + 1) / 2;
        for (std::size_t i = 0; i + half < m; ++i) partial[i] += partial[i + half];
        m = half;
    }
    return partial[0];
}

template <class F>
inline double block_sum_f(std::int64_t n, F&& f) {
    constexpr std::int64_t kBlock = 1024;
    const std::int64_t nb = (n + kBlock - 1) / kBlock;
    std::vector<double> partial(static_cast<std::size_t>(nb), 0.0);
    parallel_for(0, nb, [&](std::int64_t b) {
        const std::int64_t lo = b * kBlock, hi = std::min(n, lo + kBlock);
        double s = 0.0;
        for (std::int64_t i = lo; i < hi; ++i) s += f(i);
        partial[static_cast<std::size_t>(b)] = s;
    });
    return block_sum(partial);
}

// ---- misc ------------------------------------------------------------------

struct numerical_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline std::mt19937_64 make_rng(std::uint64_t seed) { return std::mt19937_64(seed); }

}  // namespace vpl
