#pragma once

// Phase-space substrate: cell-centered velocity grids on [-R,R]^3, a periodic
// spatial grid on the unit torus (reduced to 1D in x), distribution fields,
// Maxwellians, moments and weighted norms.
//
// Velocity nodes are v_i = (i - n/2 + 1/2) h so the grid is exactly symmetric
// in floating point and no node sits at the origin (n even).

#include <complex>
#include <functional>
#include <memory>

#include "vpl/common.hpp"
#include "vpl/fft.hpp"

namespace vpl {

struct VelocityGrid {
    int n = 0;         // points per axis, even, >= 8
    double extent = 0; // half-width R
    double h = 0;      // spacing 2R/n

    VelocityGrid() = default;
    VelocityGrid(int n_per_axis, double R) : n(n_per_axis), extent(R), h(2.0 * R / n_per_axis) {
        if (n < 8 || n % 2 != 0) throw std::invalid_argument("VelocityGrid: n must be even and >= 8");
        if (!(R > 0)) throw std::invalid_argument("VelocityGrid: extent must be positive");
    }

    std::int64_t size() const { return static_cast<std::int64_t>(n) * n * n; }
    double coord(int i) const { return (i - n / 2 + 0.5) * h; }
    vec3 node(int i, int j, int k) const { return {coord(i), coord(j), coord(k)}; }
    vec3 node(std::int64_t idx) const {
        const int k = static_cast<int>(idx % n);
        const int j = static_cast<int>((idx / n) % n);
        const int i = static_cast<int>(idx / (static_cast<std::int64_t>(n) * n));
        return node(i, j, k);
    }
    std::int64_t index(int i, int j, int k) const {
        return (static_cast<std::int64_t>(i) * n + j) * n + k;
    }
    double cell_volume() const { return h * h * h; }

    bool operator==(const VelocityGrid& o) const { return n == o.n && extent == o.extent; }

    // default truncation radius for a set of inverse temperatures
    static double default_extent(double q_min) { return std::max(6.0, 6.0 / std::sqrt(q_min)); }
};

struct SpatialGrid {
    int n_cells = 1;
    double length = 1.0;  // torus period, fixed 1

    SpatialGrid() = default;
    explicit SpatialGrid(int nx, double L = 1.0) : n_cells(nx), length(L) {
        if (nx != 1 && nx < 4) throw std::invalid_argument("SpatialGrid: n_cells must be 1 or >= 4");
    }
    double dx() const { return length / n_cells; }
    double coord(int i) const { return (i + 0.5) * dx(); }
    bool operator==(const SpatialGrid& o) const { return n_cells == o.n_cells && length == o.length; }
};

enum class Species { ion, electron };

// A species' phase-space density on x-cells x velocity nodes, x-major layout.
struct Field {
    Species species = Species::ion;
    bool is_signed = false;  // perturbations may be signed
    SpatialGrid xg;
    VelocityGrid vg;
    std::vector<double> values;  // size xg.n_cells * vg.size()

    Field() = default;
    Field(SpatialGrid x, VelocityGrid v, Species s = Species::ion, bool sgn = false)
        : species(s), is_signed(sgn), xg(x), vg(v),
          values(static_cast<std::size_t>(x.n_cells) * v.size(), 0.0) {}
    // velocity-only field (one x-cell)
    explicit Field(VelocityGrid v, Species s = Species::ion, bool sgn = false)
        : Field(SpatialGrid(1), v, s, sgn) {}

    std::int64_t nv() const { return vg.size(); }
    int nx() const { return xg.n_cells; }
    double* slice(int ix) { return values.data() + static_cast<std::size_t>(ix) * nv(); }
    const double* slice(int ix) const { return values.data() + static_cast<std::size_t>(ix) * nv(); }
    double measure() const { return vg.cell_volume() * (nx() > 1 ? xg.dx() : 1.0); }

    Field& operator+=(const Field& o) {
        for (std::size_t i = 0; i < values.size(); ++i) values[i] += o.values[i];
        return *this;
    }
    Field& operator-=(const Field& o) {
        for (std::size_t i = 0; i < values.size(); ++i) values[i] -= o.values[i];
        return *this;
    }
    Field& operator*=(double s) {
        for (double& v : values) v *= s;
        return *this;
    }
};

// mu_q(xi) = (q/2pi)^{3/2} exp(-q|xi|^2/2)
inline double maxwellian_value(double q, const vec3& v) {
    return std::pow(q / (2.0 * M_PI), 1.5) * std::exp(-0.5 * q * norm2(v));
}

inline Field maxwellian(double q, const VelocityGrid& vg, Species s = Species::electron) {
    if (!(q > 0)) throw std::domain_error("maxwellian: q must be positive");
    Field f(vg, s);
    const double pref = std::pow(q / (2.0 * M_PI), 1.5);
    const int n = vg.n;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k < n; ++k) {
                const vec3 v = vg.node(i, j, k);
                f.values[static_cast<std::size_t>(vg.index(i, j, k))] =
                    pref * std::exp(-0.5 * q * norm2(v));
            }
    return f;
}

// fill a (possibly x-resolved) field from a callable f(x, v)
inline Field sample_field(const SpatialGrid& xg, const VelocityGrid& vg,
                          const std::function<double(double, const vec3&)>& f,
                          Species s = Species::ion, bool sgn = false) {
    Field out(xg, vg, s, sgn);
    for (int ix = 0; ix < xg.n_cells; ++ix) {
        const double x = xg.coord(ix);
        double* p = out.slice(ix);
        for (std::int64_t iv = 0; iv < vg.size(); ++iv) p[iv] = f(x, vg.node(iv));
    }
    return out;
}

struct Moments {
    double density = 0;
    vec3 momentum{0, 0, 0};
    double kinetic_energy = 0;  // (1/2) int |v|^2 F dv
};

// midpoint-rule moments per x-cell
inline std::vector<Moments> moments(const Field& F) {
    const auto& vg = F.vg;
    const double w = vg.cell_volume();
    std::vector<Moments> out(F.nx());
    for (int ix = 0; ix < F.nx(); ++ix) {
        const double* p = F.slice(ix);
        double m = 0, px = 0, py = 0, pz = 0, en = 0;
        for (std::int64_t iv = 0; iv < vg.size(); ++iv) {
            const vec3 v = vg.node(iv);
            const double f = p[iv];
            m += f;
            px += f * v[0];
            py += f * v[1];
            pz += f * v[2];
            en += 0.5 * f * norm2(v);
        }
        out[ix] = {m * w, {px * w, py * w, pz * w}, en * w};
    }
    return out;
}

inline std::vector<double> density(const Field& F) {
    auto m = moments(F);
    std::vector<double> n(m.size());
    for (std::size_t i = 0; i < m.size(); ++i) n[i] = m[i].density;
    return n;
}

// total (x-integrated) moments; for nx==1 the x measure is 1
inline Moments total_moments(const Field& F) {
    auto per = moments(F);
    const double wx = F.nx() > 1 ? F.xg.dx() : 1.0;
    Moments t;
    for (auto& m : per) {
        t.density += wx * m.density;
        for (int c = 0; c < 3; ++c) t.momentum[c] += wx * m.momentum[c];
        t.kinetic_energy += wx * m.kinetic_energy;
    }
    return t;
}

// ---- weighted L2 norms -------------------------------------------------------

struct WeightSpec {
    enum Kind { polynomial, gaussian } kind = polynomial;
    double param = 0;  // m for <v>^m, q for exp(q|v|^2/4)

    static WeightSpec poly(double m) { return {polynomial, m}; }
    static WeightSpec gauss(double q) { return {gaussian, q}; }
};

inline double weight_value(const WeightSpec& w, const vec3& v) {
    if (w.kind == WeightSpec::polynomial) return std::pow(jbracket(v), w.param);
    return std::exp(0.25 * w.param * norm2(v));
}

// || w(v) F ||_{L^2_{x,v}}; guards against Gaussian weights the grid cannot hold
inline double weighted_l2(const Field& F, const WeightSpec& w) {
    if (w.kind == WeightSpec::gaussian) {
        const double arg = 0.5 * w.param * F.vg.extent * F.vg.extent;  // weight^2 exponent at the corner
        if (3.0 * arg > 600.0) throw numerical_error("weighted_l2: gaussian weight overflows grid extent");
    }
    const double meas = F.measure();
    const std::int64_t nv = F.nv();
    double acc = 0;
    for (int ix = 0; ix < F.nx(); ++ix) {
        const double* p = F.slice(ix);
        acc += block_sum_f(nv, [&](std::int64_t iv) {
            const double wv = weight_value(w, F.vg.node(iv));
            const double t = wv * p[iv];
            return t * t;
        });
    }
    return std::sqrt(acc * meas);
}

inline double l2_norm(const Field& F) { return weighted_l2(F, WeightSpec::poly(0)); }

// ---- spectral x machinery ----------------------------------------------------

// multiply each Fourier mode m (wavenumber k = 2 pi m / L) by g(k); F modified in place
inline void apply_x_multiplier(Field& F, const std::function<double(double)>& g) {
    const int nx = F.nx();
    if (nx == 1) {
        const double s = g(0.0);
        for (double& v : F.values) v *= s;
        return;
    }
    const std::int64_t nv = F.nv();
    // process velocity nodes in blocks to bound scratch memory
    const std::int64_t blk = std::min<std::int64_t>(nv, 8192);
    FftX fft(nx, blk);
    std::vector<double> mult(nx);
    for (int m = 0; m < nx; ++m) {
        const int mm = (m <= nx / 2) ? m : m - nx;
        mult[m] = g(2.0 * M_PI * mm / F.xg.length);
    }
    auto& buf = fft.buf();
    for (std::int64_t b0 = 0; b0 < nv; b0 += blk) {
        const std::int64_t bn = std::min(blk, nv - b0);
        for (int ix = 0; ix < nx; ++ix) {
            const double* src = F.slice(ix) + b0;
            for (std::int64_t j = 0; j < bn; ++j) buf[static_cast<std::size_t>(ix) * blk + j] = src[j];
            for (std::int64_t j = bn; j < blk; ++j) buf[static_cast<std::size_t>(ix) * blk + j] = 0.0;
        }
        fft.forward();
        for (int m = 0; m < nx; ++m)
            for (std::int64_t j = 0; j < blk; ++j) buf[static_cast<std::size_t>(m) * blk + j] *= mult[m];
        fft.backward();
        const double inv = 1.0 / nx;
        for (int ix = 0; ix < nx; ++ix) {
            double* dst = F.slice(ix) + b0;
            for (std::int64_t j = 0; j < bn; ++j)
                dst[j] = buf[static_cast<std::size_t>(ix) * blk + j].real() * inv;
        }
    }
}

// || <grad_x>^s F ||_{L^2_{x,v}} evaluated spectrally on the periodic grid
inline double x_derivative_norm(const Field& F, int s) {
    if (s < 0) throw std::invalid_argument("x_derivative_norm: s must be >= 0");
    if (s == 0 || F.nx() == 1) return l2_norm(F);
    Field tmp = F;
    apply_x_multiplier(tmp, [s](double k) { return std::pow(1.0 + k * k, 0.5 * s); });
    return l2_norm(tmp);
}

// combined weight + <grad_x>^s norm used by the energy functionals
inline double weighted_sobolev_norm(const Field& F, const WeightSpec& w, int s) {
    if (s == 0 || F.nx() == 1) return weighted_l2(F, w);
    Field tmp = F;
    apply_x_multiplier(tmp, [s](double k) { return std::pow(1.0 + k * k, 0.5 * s); });
    return weighted_l2(tmp, w);
}

}  // namespace vpl
