#pragma once

// The Landau kernel Phi(z) = (1/|z|)(I - z z^T/|z|^2), its cell averages,
// kernel convolutions Phi*G on the velocity lattice, the diffusion matrix
// sigma = Phi*mu_1, and far-field (multipole) evaluation.
//
// Two tabulations coexist on purpose:
//   * an averaged table (cell averages near the singularity, point values in
//     the far field) backing the field-level convolutions conv_phi / sigma;
//   * a point-sampled table whose entries satisfy Phi(z) z = 0 identically,
//     backing the pairwise collision forms where that algebraic cancellation
//     carries the conservation and equilibrium structure.

#include <map>
#include <memory>

#include "vpl/fft.hpp"
#include "vpl/grid.hpp"

namespace vpl {

inline sym3 phi(const vec3& z) {
    const double r2 = norm2(z);
    if (r2 == 0.0) throw std::domain_error("phi: singular at z = 0");
    const double r = std::sqrt(r2);
    sym3 m;
    m.a[0] = (1.0 - z[0] * z[0] / r2) / r;
    m.a[1] = (1.0 - z[1] * z[1] / r2) / r;
    m.a[2] = (1.0 - z[2] * z[2] / r2) / r;
    m.a[3] = -z[0] * z[1] / r2 / r;
    m.a[4] = -z[0] * z[2] / r2 / r;
    m.a[5] = -z[1] * z[2] / r2 / r;
    return m;
}

// row divergence d_i Phi_ij(z) = -2 z_j / |z|^3 (no singular part in first derivatives)
inline vec3 dphi(const vec3& z) {
    const double r2 = norm2(z);
    if (r2 == 0.0) throw std::domain_error("dphi: singular at z = 0");
    const double r3 = r2 * std::sqrt(r2);
    return {-2.0 * z[0] / r3, -2.0 * z[1] / r3, -2.0 * z[2] / r3};
}

// grad_k Phi_ij contracted against a vector m: sum_k m_k d_k Phi_ij
inline sym3 phi_grad_contract(const vec3& z, const vec3& m) {
    const double r2 = norm2(z);
    const double r = std::sqrt(r2), r3 = r2 * r, r5 = r3 * r2;
    const double zm = dot(z, m);
    sym3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const double dij = (i == j) ? 1.0 : 0.0;
            double v = -zm * dij / r3 - (m[i] * z[j] + m[j] * z[i]) / r3 + 3.0 * z[i] * z[j] * zm / r5;
            out.set(i, j, v);
        }
    return out;
}

// Hessian of Phi contracted against a symmetric second-moment matrix M:
// (1/2) sum_{kl} M_kl d_k d_l Phi_ij
inline sym3 phi_hess_contract(const vec3& z, const sym3& M) {
    const double r2 = norm2(z);
    const double r = std::sqrt(r2), r3 = r2 * r, r5 = r3 * r2, r7 = r5 * r2;
    const vec3 Mz = M.apply(z);
    const double zMz = dot(z, Mz);
    const double trM = M.trace();
    sym3 out;
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const double dij = (i == j) ? 1.0 : 0.0;
            // d_k d_l (delta_ij / r) = delta_ij (3 z_k z_l - r^2 delta_kl)/r^5
            double t1 = dij * (3.0 * zMz - r2 * trM) / r5;
            // d_k d_l (z_i z_j / r^3) contracted with M_kl:
            //   2 M_ij/r^3 - 3[ z_i Mz_j + z_j Mz_i ] * 2 /r^5 ... expanded below
            double t2 = 2.0 * M(i, j) / r3 - 6.0 * (z[i] * Mz[j] + z[j] * Mz[i]) / r5 -
                        3.0 * z[i] * z[j] * trM / r5 + 15.0 * z[i] * z[j] * zMz / r7;
            out.set(i, j, 0.5 * (t1 - t2));
        }
    return out;
}

// ---- cell averages -----------------------------------------------------------

namespace detail {

inline const std::array<std::pair<double, double>, 6>& gauss6() {
    // Gauss-Legendre nodes/weights on [-1,1]
    static const std::array<std::pair<double, double>, 6> gl = {{
        {-0.932469514203152, 0.171324492379170},
        {-0.661209386466265, 0.360761573048139},
        {-0.238619186083197, 0.467913934572691},
        {0.238619186083197, 0.467913934572691},
        {0.661209386466265, 0.360761573048139},
        {0.932469514203152, 0.171324492379170},
    }};
    return gl;
}

// integral of Phi over an axis-aligned box that does not contain the origin
inline sym3 phi_box_gauss(const vec3& lo, const vec3& hi) {
    const auto& gl = gauss6();
    sym3 acc{};
    const vec3 c = {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
    const vec3 s = {0.5 * (hi[0] - lo[0]), 0.5 * (hi[1] - lo[1]), 0.5 * (hi[2] - lo[2])};
    for (auto [x, wx] : gl)
        for (auto [y, wy] : gl)
            for (auto [z, wz] : gl) {
                const vec3 p = {c[0] + s[0] * x, c[1] + s[1] * y, c[2] + s[2] * z};
                acc += (wx * wy * wz) * phi(p);
            }
    return (s[0] * s[1] * s[2]) * acc;
}

inline sym3 phi_box_adaptive(const vec3& lo, const vec3& hi, int depth);

// box with the origin at one corner: geometric refinement toward the corner
inline sym3 phi_box_corner(const vec3& lo, const vec3& hi, int depth) {
    // identify the corner closest to origin; assume it IS the origin
    sym3 acc{};
    vec3 l = lo, h = hi;
    for (int d = 0; d < depth; ++d) {
        const vec3 mid = {0.5 * (l[0] + h[0]), 0.5 * (l[1] + h[1]), 0.5 * (l[2] + h[2])};
        // split into 8; the child containing the origin-corner is recursed
        for (int oct = 0; oct < 8; ++oct) {
            vec3 blo, bhi;
            bool corner_child = true;
            for (int c = 0; c < 3; ++c) {
                const bool near_zero = std::abs(l[c]) <= std::abs(h[c]);
                const bool lower = ((oct >> c) & 1) == 0;
                if (lower) {
                    blo[c] = l[c];
                    bhi[c] = mid[c];
                } else {
                    blo[c] = mid[c];
                    bhi[c] = h[c];
                }
                if (lower != near_zero) corner_child = false;
            }
            if (corner_child) continue;  // handled at next depth
            acc += phi_box_gauss(blo, bhi);
        }
        // shrink to the corner child
        vec3 nl, nh;
        for (int c = 0; c < 3; ++c) {
            if (std::abs(l[c]) <= std::abs(h[c])) {
                nl[c] = l[c];
                nh[c] = mid[c];
            } else {
                nl[c] = mid[c];
                nh[c] = h[c];
            }
        }
        l = nl;
        h = nh;
    }
    return acc;  // the innermost sliver (size ~2^-depth) contributes O(size^2) and is dropped
}

inline sym3 phi_box_adaptive(const vec3& lo, const vec3& hi, int depth) {
    const bool inside = lo[0] < 0 && hi[0] > 0 && lo[1] < 0 && hi[1] > 0 && lo[2] < 0 && hi[2] > 0;
    if (!inside) {
        const bool corner = (lo[0] == 0 || hi[0] == 0) || (lo[1] == 0 || hi[1] == 0) || (lo[2] == 0 || hi[2] == 0);
        // distance from box to origin
        double d2 = 0;
        for (int c = 0; c < 3; ++c) {
            double t = std::max({lo[c], -hi[c], 0.0});
            d2 += t * t;
        }
        const double diam = norm(hi - lo);
        if (d2 > 0.0 && std::sqrt(d2) > 0.25 * diam) return phi_box_gauss(lo, hi);
        if (corner && d2 == 0.0) return phi_box_corner(lo, hi, depth);
        // near the origin but not touching: split once and recurse
        const vec3 mid = {0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1]), 0.5 * (lo[2] + hi[2])};
        sym3 acc{};
        for (int oct = 0; oct < 8; ++oct) {
            vec3 blo, bhi;
            for (int c = 0; c < 3; ++c) {
                if (((oct >> c) & 1) == 0) {
                    blo[c] = lo[c];
                    bhi[c] = mid[c];
                } else {
                    blo[c] = mid[c];
                    bhi[c] = hi[c];
                }
            }
            acc += phi_box_adaptive(blo, bhi, depth - 1);
        }
        return acc;
    }
    // origin strictly inside: split at the origin into 8 corner boxes
    sym3 acc{};
    for (int oct = 0; oct < 8; ++oct) {
        vec3 blo, bhi;
        for (int c = 0; c < 3; ++c) {
            if (((oct >> c) & 1) == 0) {
                blo[c] = lo[c];
                bhi[c] = 0.0;
            } else {
                blo[c] = 0.0;
                bhi[c] = hi[c];
            }
        }
        acc += phi_box_corner(blo, bhi, depth);
    }
    return acc;
}

}  // namespace detail

// average of Phi over the cube of side h centered at `center`; the cell
// containing the origin is integrated by adaptive refinement (tol ~1e-10)
inline sym3 phi_cell_average(const vec3& center, double h) {
    if (!(h > 0)) throw std::invalid_argument("phi_cell_average: h must be positive");
    const vec3 lo = {center[0] - 0.5 * h, center[1] - 0.5 * h, center[2] - 0.5 * h};
    const vec3 hi = {center[0] + 0.5 * h, center[1] + 0.5 * h, center[2] + 0.5 * h};
    const double inv_vol = 1.0 / (h * h * h);
    const bool touches = lo[0] <= 0 && hi[0] >= 0 && lo[1] <= 0 && hi[1] >= 0 && lo[2] <= 0 && hi[2] >= 0;
    sym3 m = touches ? detail::phi_box_adaptive(lo, hi, 26) : detail::phi_box_gauss(lo, hi);
    return inv_vol * m;
}

// average of dPhi over a cell; odd kernel, so the centered origin cell is zero
inline vec3 dphi_cell_average(const vec3& center, double h) {
    if (std::abs(center[0]) < 0.25 * h && std::abs(center[1]) < 0.25 * h && std::abs(center[2]) < 0.25 * h)
        return {0.0, 0.0, 0.0};
    const auto& gl = detail::gauss6();
    vec3 acc{0, 0, 0};
    for (auto [x, wx] : gl)
        for (auto [y, wy] : gl)
            for (auto [z, wz] : gl) {
                const vec3 p = {center[0] + 0.5 * h * x, center[1] + 0.5 * h * y, center[2] + 0.5 * h * z};
                const vec3 d = dphi(p);
                const double w = wx * wy * wz;
                acc = acc + w * d;
            }
    return 0.125 * acc;  // (1/8) from the [-1,1]^3 -> cell jacobian over cell volume
}

// ---- per-node symmetric matrix data -------------------------------------------

struct KernelField {
    VelocityGrid vg;
    std::array<std::vector<double>, 6> comp;  // xx,yy,zz,xy,xz,yz

    KernelField() = default;
    explicit KernelField(const VelocityGrid& g) : vg(g) {
        for (auto& c : comp) c.assign(static_cast<std::size_t>(g.size()), 0.0);
    }
    sym3 at(std::int64_t idx) const {
        sym3 m;
        for (int c = 0; c < 6; ++c) m.a[c] = comp[c][static_cast<std::size_t>(idx)];
        return m;
    }
    std::int64_t size() const { return vg.size(); }
};

// far-field sigma = Phi*mu_q: Phi(w) + (1/q)(3 w w^T/|w|^2 - I)/|w|^3; the next
// correction vanishes because Lap^2 Phi = 0 away from the origin
inline sym3 sigma_far(const vec3& w, double q = 1.0) {
    const double r2 = norm2(w);
    const double r = std::sqrt(r2), r3 = r2 * r;
    sym3 m = phi(w);
    for (int i = 0; i < 3; ++i)
        for (int j = i; j < 3; ++j) {
            const double dij = (i == j) ? 1.0 : 0.0;
            m.set(i, j, m(i, j) + (3.0 * w[i] * w[j] / r2 - dij) / (q * r3));
        }
    return m;
}

// ---- kernel tables + convolution -----------------------------------------------

enum class ConvMode { fft, direct };

namespace detail {

// thread-local scratch FFT per padded size
inline Fft3D& scratch_fft(int L) {
    thread_local std::map<int, std::unique_ptr<Fft3D>> cache;
    auto& slot = cache[L];
    if (!slot) slot = std::make_unique<Fft3D>(L);
    return *slot;
}

}  // namespace detail

// Tables of kernel values on the offset lattice {m h : |m_c| <= n-1}, plus
// cached spectra for FFT convolution. Built once per velocity grid.
class KernelTable {
  public:
    explicit KernelTable(const VelocityGrid& g) : vg_(g), nt_(2 * g.n - 1) {
        build_tables();
    }

    const VelocityGrid& grid() const { return vg_; }
    int pad() const { return 2 * vg_.n; }

    // averaged-table convolution of all 6 components with G (one x-slice)
    void conv_avg(const double* G, KernelField& out) const { conv6(avg_, G, out); }
    // point-table convolution (pairwise forms)
    void conv_point(const double* G, KernelField& out) const { conv6(point_, G, out); }
    // dPhi (averaged) convolution: 3 components
    void conv_dphi(const double* G, std::array<std::vector<double>, 3>& out) const {
        ensure_spectra(dphi_, dphi_spec_);
        conv_generic(dphi_, dphi_spec_, G, out);
    }
    // trace kernel 1/|z| convolution
    void conv_inv_r(const double* G, std::vector<double>& out) const {
        ensure_inv_r();
        std::array<std::vector<double>, 1> tmp;
        tmp[0].assign(static_cast<std::size_t>(vg_.size()), 0.0);
        conv_generic(inv_r_, inv_r_spec_, G, tmp);
        out = std::move(tmp[0]);
    }

    // contraction sum_i Phi_ij * S_i with the point table, accumulated spectrally;
    // S are 3 fields, out are 3 fields
    void conv_point_contract(const std::array<const double*, 3>& S,
                             std::array<std::vector<double>, 3>& out) const {
        ensure_spectra(point_, point_spec_);
        const int L = pad();
        auto& fft = detail::scratch_fft(L);
        const std::int64_t nc = fft.n_complex();
        std::array<std::vector<std::complex<double>>, 3> Shat;
        for (int c = 0; c < 3; ++c) {
            pad_field(S[c], fft);
            fft.forward();
            Shat[c].assign(fft.cplx_buf().begin(), fft.cplx_buf().end());
        }
        static constexpr int map[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
        for (int j = 0; j < 3; ++j) {
            auto& cb = fft.cplx_buf();
            for (std::int64_t m = 0; m < nc; ++m) {
                std::complex<double> acc = 0;
                for (int i = 0; i < 3; ++i)
                    acc += point_spec_[map[i][j]][static_cast<std::size_t>(m)] * Shat[i][static_cast<std::size_t>(m)];
                cb[static_cast<std::size_t>(m)] = acc;
            }
            fft.backward();
            unpad_field(fft, out[j]);
        }
    }

    // direct (quadrature) convolution with the averaged table; oracle for small grids
    KernelField conv_direct(const double* G) const {
        if (vg_.n > 16) throw numerical_error("conv_phi: direct mode limited to n <= 16");
        KernelField out(vg_);
        const int n = vg_.n;
        const double w = vg_.cell_volume();
        parallel_for(0, vg_.size(), [&](std::int64_t iv) {
            const int k = static_cast<int>(iv % n), j = static_cast<int>((iv / n) % n),
                      i = static_cast<int>(iv / (static_cast<std::int64_t>(n) * n));
            std::array<double, 6> acc{};
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b)
                    for (int c = 0; c < n; ++c) {
                        const double g = G[vg_.index(a, b, c)];
                        if (g == 0.0) continue;
                        const std::size_t t = tab_index(i - a, j - b, k - c);
                        for (int m = 0; m < 6; ++m) acc[m] += avg_[m][t] * g;
                    }
            for (int m = 0; m < 6; ++m) out.comp[m][static_cast<std::size_t>(iv)] = acc[m] * w;
        });
        return out;
    }

    // table lookups (offset in lattice units)
    sym3 phi_avg_at(int mi, int mj, int mk) const {
        sym3 m;
        const std::size_t t = tab_index(mi, mj, mk);
        for (int c = 0; c < 6; ++c) m.a[c] = avg_[c][t];
        return m;
    }

    // memoized sigma = Phi * mu_1 on this grid (averaged table)
    const KernelField& sigma() const {
        std::call_once(sigma_once_, [this]() {
            Field mu = maxwellian(1.0, vg_);
            sigma_ = std::make_unique<KernelField>(vg_);
            conv_avg(mu.values.data(), *sigma_);
        });
        return *sigma_;
    }

  private:
    VelocityGrid vg_;
    int nt_;
    std::array<std::vector<double>, 6> avg_;
    std::array<std::vector<double>, 6> point_;
    std::array<std::vector<double>, 3> dphi_;
    mutable std::array<std::vector<double>, 1> inv_r_;
    mutable std::array<std::vector<std::complex<double>>, 6> avg_spec_;
    mutable std::array<std::vector<std::complex<double>>, 6> point_spec_;
    mutable std::array<std::vector<std::complex<double>>, 3> dphi_spec_;
    mutable std::array<std::vector<std::complex<double>>, 1> inv_r_spec_;
    mutable std::once_flag avg_once_, point_once_, dphi_once_, inv_r_once_, sigma_once_;
    mutable std::unique_ptr<KernelField> sigma_;
    mutable std::mutex spec_mutex_;

    std::size_t tab_index(int mi, int mj, int mk) const {
        const int o = vg_.n - 1;
        return (static_cast<std::size_t>(mi + o) * nt_ + (mj + o)) * nt_ + (mk + o);
    }

    void build_tables() {
        const std::size_t total = static_cast<std::size_t>(nt_) * nt_ * nt_;
        for (auto& c : avg_) c.assign(total, 0.0);
        for (auto& c : point_) c.assign(total, 0.0);
        for (auto& c : dphi_) c.assign(total, 0.0);
        const double h = vg_.h;
        const int o = vg_.n - 1;
        parallel_for(0, static_cast<std::int64_t>(total), [&](std::int64_t t) {
            const int mk = static_cast<int>(t % nt_) - o;
            const int mj = static_cast<int>((t / nt_) % nt_) - o;
            const int mi = static_cast<int>(t / (static_cast<std::int64_t>(nt_) * nt_)) - o;
            const vec3 z = {mi * h, mj * h, mk * h};
            const int linf = std::max({std::abs(mi), std::abs(mj), std::abs(mk)});
            const std::size_t ti = static_cast<std::size_t>(t);
            if (linf == 0) {
                const sym3 pa = phi_cell_average({0, 0, 0}, h);
                for (int c = 0; c < 6; ++c) avg_[c][ti] = pa.a[c];
                // point table keeps zero; the origin entry only ever multiplies
                // a vanishing pair difference
                return;
            }
            // Gauss cell averages of Phi and dPhi over the offset cell
            const auto& gl = detail::gauss6();
            sym3 pa{};
            vec3 da{0, 0, 0};
            for (auto [gx, wx] : gl)
                for (auto [gy, wy] : gl)
                    for (auto [gz, wz] : gl) {
                        const vec3 p = {z[0] + 0.5 * h * gx, z[1] + 0.5 * h * gy, z[2] + 0.5 * h * gz};
                        const double w = wx * wy * wz;
                        pa += w * phi(p);
                        da = da + w * dphi(p);
                    }
            pa *= 0.125;
            da = 0.125 * da;
            const sym3 pp = phi(z);
            for (int c = 0; c < 6; ++c) {
                avg_[c][ti] = pa.a[c];
                point_[c][ti] = pp.a[c];
            }
            for (int c = 0; c < 3; ++c) dphi_[c][ti] = da[c];
        });
    }

    template <std::size_t N>
    void ensure_spectra(const std::array<std::vector<double>, N>& tab,
                        std::array<std::vector<std::complex<double>>, N>& spec) const {
        std::lock_guard<std::mutex> lock(spec_mutex_);
        if (!spec[0].empty()) return;
        const int L = pad();
        auto& fft = detail::scratch_fft(L);
        for (std::size_t c = 0; c < N; ++c) {
            auto& rb = fft.real_buf();
            std::fill(rb.begin(), rb.end(), 0.0);
            for (int i = 0; i < nt_; ++i)
                for (int j = 0; j < nt_; ++j)
                    for (int k = 0; k < nt_; ++k)
                        rb[(static_cast<std::size_t>(i) * L + j) * L + k] =
                            tab[c][(static_cast<std::size_t>(i) * nt_ + j) * nt_ + k];
            fft.forward();
            spec[c].assign(fft.cplx_buf().begin(), fft.cplx_buf().end());
        }
    }

    void ensure_inv_r() const {
        // trace(Phi) = 2/|z| pointwise, so the averaged 1/|z| table is exactly
        // half the trace of the averaged Phi table
        std::call_once(inv_r_once_, [this]() {
            const std::size_t total = static_cast<std::size_t>(nt_) * nt_ * nt_;
            inv_r_[0].assign(total, 0.0);
            for (std::size_t t = 0; t < total; ++t)
                inv_r_[0][t] = 0.5 * (avg_[0][t] + avg_[1][t] + avg_[2][t]);
        });
    }

    void pad_field(const double* G, Fft3D& fft) const {
        const int L = fft.size(), n = vg_.n;
        auto& rb = fft.real_buf();
        std::fill(rb.begin(), rb.end(), 0.0);
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                double* dst = rb.data() + (static_cast<std::size_t>(i) * L + j) * L;
                const double* src = G + (static_cast<std::size_t>(i) * n + j) * n;
                for (int k = 0; k < n; ++k) dst[k] = src[k];
            }
    }

    void unpad_field(Fft3D& fft, std::vector<double>& out) const {
        const int L = fft.size(), n = vg_.n, s = n - 1;
        out.assign(static_cast<std::size_t>(vg_.size()), 0.0);
        const double scale = vg_.cell_volume() / (static_cast<double>(L) * L * L);
        auto& rb = fft.real_buf();
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double* src = rb.data() + (static_cast<std::size_t>(i + s) * L + (j + s)) * L + s;
                double* dst = out.data() + (static_cast<std::size_t>(i) * n + j) * n;
                for (int k = 0; k < n; ++k) dst[k] = src[k] * scale;
            }
    }

    template <std::size_t N>
    void conv_generic(const std::array<std::vector<double>, N>& tab,
                      std::array<std::vector<std::complex<double>>, N>& spec, const double* G,
                      std::array<std::vector<double>, N>& out) const {
        ensure_spectra(tab, spec);
        const int L = pad();
        auto& fft = detail::scratch_fft(L);
        pad_field(G, fft);
        fft.forward();
        std::vector<std::complex<double>> Ghat(fft.cplx_buf().begin(), fft.cplx_buf().end());
        for (std::size_t c = 0; c < N; ++c) {
            auto& cb = fft.cplx_buf();
            for (std::int64_t m = 0; m < fft.n_complex(); ++m)
                cb[static_cast<std::size_t>(m)] = spec[c][static_cast<std::size_t>(m)] * Ghat[static_cast<std::size_t>(m)];
            fft.backward();
            unpad_field(fft, out[c]);
        }
    }

    void conv6(const std::array<std::vector<double>, 6>& tab, const double* G, KernelField& out) const {
        auto& spec = (&tab == &avg_) ? avg_spec_ : point_spec_;
        conv_generic(tab, spec, G, out.comp);
    }
};

// global registry: one table per (n, extent)
inline std::shared_ptr<const KernelTable> kernel_table(const VelocityGrid& g) {
    static std::map<std::pair<int, double>, std::shared_ptr<const KernelTable>> registry;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto key = std::make_pair(g.n, g.extent);
    auto it = registry.find(key);
    if (it != registry.end()) return it->second;
    auto tab = std::make_shared<const KernelTable>(g);
    registry.emplace(key, tab);
    return tab;
}

// Phi * G with the averaged table; `G` must be a one-x-cell field
inline KernelField conv_phi(const Field& G, ConvMode mode = ConvMode::fft) {
    if (G.nx() != 1) throw std::invalid_argument("conv_phi: expects a velocity-only field");
    auto tab = kernel_table(G.vg);
    if (mode == ConvMode::direct) return tab->conv_direct(G.values.data());
    KernelField out(G.vg);
    tab->conv_avg(G.values.data(), out);
    return out;
}

// sigma(v) = (Phi * mu_1)(v), memoized per grid
inline const KernelField& sigma(const VelocityGrid& g) { return kernel_table(g)->sigma(); }

}  // namespace vpl
