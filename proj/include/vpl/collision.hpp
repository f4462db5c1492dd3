#pragma once

// Landau collision operators.
//
//   q_landau(G1,G2)      bilinear flux form: J_j = (Phi_ij*G1) d_i G2 - (d_iPhi_ij*G1) G2,
//                        conservative face differencing, zero-flux boundary.
//                        For identical nonnegative arguments the pairwise
//                        log-gradient form is used instead: it annihilates
//                        Maxwellians and conserves momentum/energy through the
//                        exact identity Phi(z) z = 0 of the point kernel.
//   q_cross_minus_plus   two-scale electron->ion operator (1/eps-free side)
//   q_cross_plus_minus   two-scale ion->electron operator
//   linearized_L / L_tilde / M / Gamma, entropy dissipation, and the
//   antisymmetric double-sum oracle for small grids.

#include <cstring>

#include "vpl/cheb.hpp"
#include "vpl/norms.hpp"

namespace vpl {

struct CollisionConfig {
    double eps = 1.0;  // square root of the mass ratio
    enum Split { full, diffusion_only, transport_only } split = full;

    void validate() const {
        if (!(eps > 0) || eps > 1) throw std::invalid_argument("CollisionConfig: eps in (0,1]");
    }
};

// per-node diffusion matrix (6 comps) and drift vector (3 comps)
struct FluxCoeffs {
    std::array<std::vector<double>, 6> A;
    std::array<std::vector<double>, 3> B;
    void resize(std::int64_t n) {
        for (auto& c : A) c.assign(static_cast<std::size_t>(n), 0.0);
        for (auto& c : B) c.assign(static_cast<std::size_t>(n), 0.0);
    }
};

namespace detail {

inline constexpr int sym_idx(int i, int j) {
    constexpr int map[3][3] = {{0, 3, 4}, {3, 1, 5}, {4, 5, 2}};
    return map[i][j];
}

// gradient field used by the fluxes: either grad G or G * grad(ln G)
inline void flux_gradient(const VelocityGrid& vg, const double* G, bool log_form,
                          std::array<std::vector<double>, 3>& g) {
    if (!log_form) {
        velocity_gradient(vg, G, g);
        return;
    }
    std::vector<double> lnG(static_cast<std::size_t>(vg.size()));
    for (std::int64_t i = 0; i < vg.size(); ++i)
        lnG[static_cast<std::size_t>(i)] = std::log(std::max(G[i], 1e-300));
    velocity_gradient(vg, lnG.data(), g);
    for (int c = 0; c < 3; ++c)
        for (std::int64_t i = 0; i < vg.size(); ++i) g[c][static_cast<std::size_t>(i)] *= G[i];
}

}  // namespace detail

// div_v( A grad G - B G ) with A, B given at nodes, fluxes averaged to faces,
// conservative differencing, zero flux through the truncation boundary.
// log_form replaces grad G by G grad(ln G) in the diffusion term.
inline void flux_divergence(const VelocityGrid& vg, const FluxCoeffs& cf, const double* G,
                            bool log_form, double* out, CollisionConfig::Split split = CollisionConfig::full) {
    const int n = vg.n;
    const double h = vg.h;
    std::array<std::vector<double>, 3> g;
    detail::flux_gradient(vg, G, log_form, g);

    // node fluxes J_j(v)
    std::array<std::vector<double>, 3> J;
    for (auto& c : J) c.assign(static_cast<std::size_t>(vg.size()), 0.0);
    const bool use_A = split != CollisionConfig::transport_only;
    const bool use_B = split != CollisionConfig::diffusion_only;
    parallel_for(0, vg.size(), [&](std::int64_t idx) {
        const std::size_t s = static_cast<std::size_t>(idx);
        for (int j = 0; j < 3; ++j) {
            double acc = 0;
            if (use_A)
                for (int i = 0; i < 3; ++i) acc += cf.A[detail::sym_idx(i, j)][s] * g[i][s];
            if (use_B) acc -= cf.B[j][s] * G[idx];
            J[j][s] = acc;
        }
    });

    // conservative divergence of face-averaged fluxes
    std::memset(out, 0, sizeof(double) * static_cast<std::size_t>(vg.size()));
    const std::int64_t stride[3] = {static_cast<std::int64_t>(n) * n, n, 1};
    parallel_for(0, vg.size(), [&](std::int64_t idx) {
        const int c2 = static_cast<int>(idx % n), c1 = static_cast<int>((idx / n) % n),
                  c0 = static_cast<int>(idx / (static_cast<std::int64_t>(n) * n));
        const int crd[3] = {c0, c1, c2};
        double acc = 0;
        for (int ax = 0; ax < 3; ++ax) {
            const std::int64_t st = stride[ax];
            const double* Jx = J[ax].data();
            const double jp = crd[ax] == n - 1 ? 0.0 : 0.5 * (Jx[idx] + Jx[idx + st]);
            const double jm = crd[ax] == 0 ? 0.0 : 0.5 * (Jx[idx - st] + Jx[idx]);
            acc += (jp - jm) / h;
        }
        out[idx] = acc;
    });
}

// ---- self-collision operator ---------------------------------------------------

// coefficient tables of the bilinear form for a given G1 slice
inline void landau_coeffs(const VelocityGrid& vg, const double* G1, FluxCoeffs& cf) {
    auto tab = kernel_table(vg);
    KernelField A(vg);
    tab->conv_avg(G1, A);
    for (int c = 0; c < 6; ++c) cf.A[c] = std::move(A.comp[c]);
    tab->conv_dphi(G1, cf.B);
}

// pairwise log-gradient form for a nonnegative F (one x-slice):
//   Q = div( F [ (Phi*F) g - Phi*(F g) ] ),  g = grad ln F     (point kernel)
inline void q_landau_log_slice(const VelocityGrid& vg, const double* F, double* out) {
    auto tab = kernel_table(vg);
    std::array<std::vector<double>, 3> g;
    detail::flux_gradient(vg, F, true, g);  // g holds F * grad ln F
    // we need plain grad ln F below; recover by dividing back where F > 0
    std::array<std::vector<double>, 3> glog = g;
    for (int c = 0; c < 3; ++c)
        for (std::int64_t i = 0; i < vg.size(); ++i) {
            const double f = std::max(F[i], 1e-300);
            glog[c][static_cast<std::size_t>(i)] /= f;
        }
    KernelField A(vg);
    tab->conv_point(F, A);
    std::array<const double*, 3> S = {g[0].data(), g[1].data(), g[2].data()};
    std::array<std::vector<double>, 3> C;
    tab->conv_point_contract(S, C);  // C_j = sum_i Phi_ij * (F g_i)

    // node flux J_j = F [ sum_i A_ij glog_i - C_j ]
    const int n = vg.n;
    const double h = vg.h;
    std::array<std::vector<double>, 3> J;
    for (auto& c : J) c.assign(static_cast<std::size_t>(vg.size()), 0.0);
    parallel_for(0, vg.size(), [&](std::int64_t idx) {
        const std::size_t s = static_cast<std::size_t>(idx);
        for (int j = 0; j < 3; ++j) {
            double acc = -C[j][s];
            for (int i = 0; i < 3; ++i) acc += A.comp[detail::sym_idx(i, j)][s] * glog[i][s];
            J[j][s] = F[idx] * acc;
        }
    });
    std::memset(out, 0, sizeof(double) * static_cast<std::size_t>(vg.size()));
    const std::int64_t stride[3] = {static_cast<std::int64_t>(n) * n, n, 1};
    parallel_for(0, vg.size(), [&](std::int64_t idx) {
        const int c2 = static_cast<int>(idx % n), c1 = static_cast<int>((idx / n) % n),
                  c0 = static_cast<int>(idx / (static_cast<std::int64_t>(n) * n));
        const int crd[3] = {c0, c1, c2};
        double acc = 0;
        for (int ax = 0; ax < 3; ++ax) {
            const std::int64_t st = stride[ax];
            const double* Jx = J[ax].data();
            const double jp = crd[ax] == n - 1 ? 0.0 : 0.5 * (Jx[idx] + Jx[idx + st]);
            const double jm = crd[ax] == 0 ? 0.0 : 0.5 * (Jx[idx - st] + Jx[idx]);
            acc += (jp - jm) / h;
        }
        out[idx] = acc;
    });
}

inline void q_landau_bilinear_slice(const VelocityGrid& vg, const double* G1, const double* G2,
                                    double* out, CollisionConfig::Split split = CollisionConfig::full) {
    FluxCoeffs cf;
    landau_coeffs(vg, G1, cf);
    flux_divergence(vg, cf, G2, false, out, split);
}

// Q(G1, G2); same-valued nonnegative arguments take the log-form path
inline Field q_landau(const Field& G1, const Field& G2) {
    if (!(G1.vg == G2.vg) || G1.nx() != G2.nx())
        throw std::invalid_argument("q_landau: grid mismatch");
    Field out(G1.xg, G1.vg, G2.species, true);
    bool same = G1.values.size() == G2.values.size() &&
                std::memcmp(G1.values.data(), G2.values.data(),
                            G1.values.size() * sizeof(double)) == 0;
    if (same)
        for (double v : G1.values)
            if (v < 0) {
                same = false;
                break;
            }
    for (int ix = 0; ix < G1.nx(); ++ix) {
        if (same)
            q_landau_log_slice(G1.vg, G1.slice(ix), out.slice(ix));
        else
            q_landau_bilinear_slice(G1.vg, G1.slice(ix), G2.slice(ix), out.slice(ix));
    }
    return out;
}

// antisymmetric double-sum form (exactly momentum/energy conservative for
// Q(F,F)); O(N^2) pairs, intended as an oracle on small grids
inline Field q_landau_pair_oracle(const Field& F) {
    const auto& vg = F.vg;
    if (vg.n > 16) throw numerical_error("q_landau_pair_oracle: n <= 16 required");
    if (F.nx() != 1) throw std::invalid_argument("q_landau_pair_oracle: velocity-only field");
    std::array<std::vector<double>, 3> g;
    velocity_gradient(vg, F.values.data(), g);
    const double w3 = vg.cell_volume();
    const std::int64_t N = vg.size();
    std::array<std::vector<double>, 3> J;
    for (auto& c : J) c.assign(static_cast<std::size_t>(N), 0.0);
    parallel_for(0, N, [&](std::int64_t i) {
        const vec3 vi = vg.node(i);
        const double fi = F.values[static_cast<std::size_t>(i)];
        const vec3 gi = {g[0][static_cast<std::size_t>(i)], g[1][static_cast<std::size_t>(i)],
                         g[2][static_cast<std::size_t>(i)]};
        vec3 acc{0, 0, 0};
        for (std::int64_t j = 0; j < N; ++j) {
            if (j == i) continue;
            const vec3 vj = vg.node(j);
            const double fj = F.values[static_cast<std::size_t>(j)];
            const vec3 gj = {g[0][static_cast<std::size_t>(j)], g[1][static_cast<std::size_t>(j)],
                             g[2][static_cast<std::size_t>(j)]};
            const sym3 P = phi(vi - vj);
            const vec3 w = {fj * gi[0] - fi * gj[0], fj * gi[1] - fi * gj[1], fj * gi[2] - fi * gj[2]};
            const vec3 Pw = P.apply(w);
            acc = acc + Pw;
        }
        for (int c = 0; c < 3; ++c) J[c][static_cast<std::size_t>(i)] = acc[c] * w3;
    });
    Field out(vg, F.species, true);
    const int n = vg.n;
    const std::int64_t stride[3] = {static_cast<std::int64_t>(n) * n, n, 1};
    parallel_for(0, N, [&](std::int64_t idx) {
        const int c2 = static_cast<int>(idx % n), c1 = static_cast<int>((idx / n) % n),
                  c0 = static_cast<int>(idx / (static_cast<std::int64_t>(n) * n));
        const int crd[3] = {c0, c1, c2};
        double acc = 0;
        for (int ax = 0; ax < 3; ++ax) {
            const std::int64_t st = stride[ax];
            const double* Jx = J[ax].data();
            const double jp = crd[ax] == n - 1 ? 0.0 : 0.5 * (Jx[idx] + Jx[idx + st]);
            const double jm = crd[ax] == 0 ? 0.0 : 0.5 * (Jx[idx - st] + Jx[idx]);
            acc += (jp - jm) / vg.h;
        }
        out.values[static_cast<std::size_t>(idx)] = acc;
    });
    return out;
}

// ---- two-scale coefficients ------------------------------------------------------

// Direct quadrature of (Phi * G)(z) and (dPhi * G)(z) over the partner grid,
// with the singular quadrature cell replaced by its cell average.
struct TwoScalePoint {
    sym3 A;
    vec3 B;
};

inline TwoScalePoint two_scale_eval(const VelocityGrid& pg, const double* G, const vec3& z,
                                    double cell_scale) {
    // cell_scale: side of one quadrature cell in z units (= eps*h for scaled sums)
    TwoScalePoint out{};
    const double w3 = pg.cell_volume();
    const int n = pg.n;
    const double reg = 0.5 * cell_scale;
    // Phi cell average at the origin of a cube with side a is c0/a * I
    static const double c0 = phi_cell_average({0, 0, 0}, 1.0).a[0];
    for (int a = 0; a < n; ++a) {
        const double za = z[0] - 0.0;  // computed per node below
        (void)za;
        for (int b = 0; b < n; ++b)
            for (int c = 0; c < n; ++c) {
                const double gval = G[pg.index(a, b, c)];
                if (gval == 0.0) continue;
                const vec3 d = {z[0] - pg.coord(a), z[1] - pg.coord(b), z[2] - pg.coord(c)};
                const double r2 = norm2(d);
                if (r2 < reg * reg) {
                    const double ca = c0 / cell_scale;
                    out.A.a[0] += ca * gval;
                    out.A.a[1] += ca * gval;
                    out.A.a[2] += ca * gval;
                    continue;  // dPhi average ~ 0 on the near-centered cell
                }
                const double r = std::sqrt(r2), inv_r = 1.0 / r, inv_r2 = 1.0 / r2;
                const double ir3 = inv_r * inv_r2;
                out.A.a[0] += (1.0 - d[0] * d[0] * inv_r2) * inv_r * gval;
                out.A.a[1] += (1.0 - d[1] * d[1] * inv_r2) * inv_r * gval;
                out.A.a[2] += (1.0 - d[2] * d[2] * inv_r2) * inv_r * gval;
                out.A.a[3] += -d[0] * d[1] * inv_r2 * inv_r * gval;
                out.A.a[4] += -d[0] * d[2] * inv_r2 * inv_r * gval;
                out.A.a[5] += -d[1] * d[2] * inv_r2 * inv_r * gval;
                out.B[0] += -2.0 * d[0] * ir3 * gval;
                out.B[1] += -2.0 * d[1] * ir3 * gval;
                out.B[2] += -2.0 * d[2] * ir3 * gval;
            }
    }
    out.A *= w3;
    out.B = w3 * out.B;
    return out;
}

enum class CrossEval { direct, tabulated };

// Coefficients of Q_{-+} on the ion grid: A(eps v), B(eps v), where
// A = Phi * G_e and B = dPhi * G_e over the electron grid. `tabulated`
// samples the smooth coefficients at Chebyshev nodes spanning the small cube
// |z| <= eps(R_i + h) and interpolates to the eps-scaled ion lattice.
inline void ion_cross_coeffs(const VelocityGrid& ion, const VelocityGrid& elec, const double* Ge,
                             double eps, CrossEval mode, FluxCoeffs& cf, int ncheb = 8) {
    cf.resize(ion.size());
    const double cell = elec.h;  // quadrature cell of the electron sum
    if (mode == CrossEval::direct) {
        parallel_for(0, ion.size(), [&](std::int64_t iv) {
            const vec3 z = eps * ion.node(iv);
            const TwoScalePoint p = two_scale_eval(elec, Ge, z, cell);
            for (int c = 0; c < 6; ++c) cf.A[c][static_cast<std::size_t>(iv)] = p.A.a[c];
            for (int c = 0; c < 3; ++c) cf.B[c][static_cast<std::size_t>(iv)] = p.B[c];
        });
        return;
    }
    // Chebyshev tabulation per component
    const double a = eps * (ion.extent + ion.h);
    ChebAxis ax(ncheb, 0.0, a);
    const int N = ncheb;
    std::vector<double> samples(static_cast<std::size_t>(N) * N * N * 9);
    parallel_for(0, static_cast<std::int64_t>(N) * N * N, [&](std::int64_t t) {
        const int k = static_cast<int>(t % N), j = static_cast<int>((t / N) % N),
                  i = static_cast<int>(t / (static_cast<std::int64_t>(N) * N));
        const vec3 z = {ax.nodes[static_cast<std::size_t>(i)], ax.nodes[static_cast<std::size_t>(j)],
                        ax.nodes[static_cast<std::size_t>(k)]};
        const TwoScalePoint p = two_scale_eval(elec, Ge, z, cell);
        for (int c = 0; c < 6; ++c) samples[static_cast<std::size_t>(t) * 9 + c] = p.A.a[c];
        for (int c = 0; c < 3; ++c) samples[static_cast<std::size_t>(t) * 9 + 6 + c] = p.B[c];
    });
    std::vector<double> targets(static_cast<std::size_t>(ion.n));
    for (int i = 0; i < ion.n; ++i) targets[static_cast<std::size_t>(i)] = eps * ion.coord(i);
    std::vector<double> comp(static_cast<std::size_t>(N) * N * N);
    for (int c = 0; c < 9; ++c) {
        for (std::int64_t t = 0; t < static_cast<std::int64_t>(N) * N * N; ++t)
            comp[static_cast<std::size_t>(t)] = samples[static_cast<std::size_t>(t) * 9 + c];
        auto vals = cheb_tensor_eval(ax, comp, targets);
        if (c < 6)
            cf.A[c].assign(vals.begin(), vals.end());
        else
            cf.B[c - 6].assign(vals.begin(), vals.end());
    }
}

// Coefficients of Q_{+-} on the electron grid: A(xi) = int Phi(xi - eps v') G_i dv'
// and B(xi) likewise for dPhi. Near nodes are summed directly; far nodes use the
// second-order multipole expansion in the scaled ion moments.
inline void electron_cross_coeffs(const VelocityGrid& elec, const VelocityGrid& ion, const double* Gi,
                                  double eps, FluxCoeffs& cf) {
    cf.resize(elec.size());
    // moments of the scaled density g(w) = eps^-3 G(w/eps)
    const double w3 = ion.cell_volume();
    double M0 = 0;
    vec3 M1{0, 0, 0};
    sym3 M2{};
    for (std::int64_t iv = 0; iv < ion.size(); ++iv) {
        const double g = Gi[iv];
        if (g == 0.0) continue;
        const vec3 v = ion.node(iv);
        M0 += g;
        M1 = M1 + g * v;
        for (int i = 0; i < 3; ++i)
            for (int j = i; j < 3; ++j) M2.set(i, j, M2(i, j) + g * v[i] * v[j]);
    }
    M0 *= w3;
    M1 = (w3 * eps) * M1;
    M2 *= w3 * eps * eps;

    const double rho = eps * (ion.extent + ion.h) + 1.5 * elec.h;  // near/far split radius
    const double cell = eps * ion.h;                                // scaled quadrature cell
    parallel_for(0, elec.size(), [&](std::int64_t ix) {
        const vec3 xi = elec.node(ix);
        const std::size_t s = static_cast<std::size_t>(ix);
        if (norm(xi) <= rho) {
            // direct sum over the ion grid in scaled coordinates
            TwoScalePoint p{};
            const double reg = 0.5 * cell;
            static const double c0 = phi_cell_average({0, 0, 0}, 1.0).a[0];
            for (std::int64_t jv = 0; jv < ion.size(); ++jv) {
                const double g = Gi[jv];
                if (g == 0.0) continue;
                const vec3 d = xi - eps * ion.node(jv);
                const double r2 = norm2(d);
                if (r2 < reg * reg) {
                    const double ca = c0 / cell;
                    p.A.a[0] += ca * g;
                    p.A.a[1] += ca * g;
                    p.A.a[2] += ca * g;
                    continue;
                }
                const double r = std::sqrt(r2), inv_r = 1.0 / r, inv_r2 = 1.0 / r2;
                const double ir3 = inv_r * inv_r2;
                p.A.a[0] += (1.0 - d[0] * d[0] * inv_r2) * inv_r * g;
                p.A.a[1] += (1.0 - d[1] * d[1] * inv_r2) * inv_r * g;
                p.A.a[2] += (1.0 - d[2] * d[2] * inv_r2) * inv_r * g;
                p.A.a[3] += -d[0] * d[1] * inv_r2 * inv_r * g;
                p.A.a[4] += -d[0] * d[2] * inv_r2 * inv_r * g;
                p.A.a[5] += -d[1] * d[2] * inv_r2 * inv_r * g;
                p.B[0] += -2.0 * d[0] * ir3 * g;
                p.B[1] += -2.0 * d[1] * ir3 * g;
                p.B[2] += -2.0 * d[2] * ir3 * g;
            }
            for (int c = 0; c < 6; ++c) cf.A[c][s] = p.A.a[c] * w3;
            for (int c = 0; c < 3; ++c) cf.B[c][s] = p.B[c] * w3;
        } else {
            // multipole: M0 f(xi) - (M1 . grad) f(xi) + (1/2) M2 : grad grad f(xi)
            sym3 A = M0 * phi(xi);
            A += (-1.0) * phi_grad_contract(xi, M1);
            A += phi_hess_contract(xi, M2);
            for (int c = 0; c < 6; ++c) cf.A[c][s] = A.a[c];
            const double r2 = norm2(xi), r = std::sqrt(r2);
            const double r3 = r2 * r, r5 = r3 * r2, r7 = r5 * r2;
            const vec3 M2x = M2.apply(xi);
            const double xM2x = dot(xi, M2x), trM2 = M2.trace(), xM1 = dot(xi, M1);
            for (int j = 0; j < 3; ++j) {
                double b = -2.0 * xi[j] / r3 * M0;
                // -(M1.grad) dphi_j
                b -= (-2.0 * M1[j] / r3 + 6.0 * xi[j] * xM1 / r5);
                // (1/2) M2 : grad grad dphi_j
                b += 0.5 * (6.0 * (2.0 * M2x[j] + trM2 * xi[j]) / r5 - 30.0 * xi[j] * xM2x / r7);
                cf.B[j][s] = b;
            }
        }
    });
}

// Q_{-+}^eps(G_e, F_i):  div_v( eps A(eps v) grad F_i - B(eps v) F_i )
inline Field q_cross_minus_plus(const Field& G_e, const Field& F_i, double eps,
                                CrossEval mode = CrossEval::direct, bool log_form = false) {
    if (!(eps > 0) || eps > 1) throw std::invalid_argument("q_cross_minus_plus: eps in (0,1]");
    if (G_e.nx() != F_i.nx()) throw std::invalid_argument("q_cross_minus_plus: x-cell mismatch");
    Field out(F_i.xg, F_i.vg, Species::ion, true);
    for (int ix = 0; ix < F_i.nx(); ++ix) {
        FluxCoeffs cf;
        ion_cross_coeffs(F_i.vg, G_e.vg, G_e.slice(ix), eps, mode, cf);
        for (int c = 0; c < 6; ++c)
            for (auto& v : cf.A[c]) v *= eps;
        flux_divergence(F_i.vg, cf, F_i.slice(ix), log_form, out.slice(ix));
    }
    return out;
}

// Q_{+-}^eps(F_i, G_e):  div_xi( A(xi) grad G_e - eps^2 B(xi) G_e )
inline Field q_cross_plus_minus(const Field& F_i, const Field& G_e, double eps, bool log_form = false) {
    if (!(eps > 0) || eps > 1) throw std::invalid_argument("q_cross_plus_minus: eps in (0,1]");
    if (G_e.nx() != F_i.nx()) throw std::invalid_argument("q_cross_plus_minus: x-cell mismatch");
    Field out(G_e.xg, G_e.vg, Species::electron, true);
    for (int ix = 0; ix < G_e.nx(); ++ix) {
        FluxCoeffs cf;
        electron_cross_coeffs(G_e.vg, F_i.vg, F_i.slice(ix), eps, cf);
        for (int c = 0; c < 3; ++c)
            for (auto& v : cf.B[c]) v *= eps * eps;
        flux_divergence(G_e.vg, cf, G_e.slice(ix), log_form, out.slice(ix));
    }
    return out;
}

// ---- linearized operators --------------------------------------------------------

namespace detail {

// adjoint of velocity_gradient (plain transpose of the stencil matrix, no
// measure factor): out = sum_i G_i^T w_i
inline void gradient_adjoint(const VelocityGrid& vg, const std::array<std::vector<double>, 3>& w,
                             std::vector<double>& out) {
    const int n = vg.n;
    const double ih2 = 0.5 / vg.h;
    out.assign(static_cast<std::size_t>(vg.size()), 0.0);
    const std::int64_t stride[3] = {static_cast<std::int64_t>(n) * n, n, 1};
    parallel_for(0, vg.size(), [&](std::int64_t idx) {
        const int c2 = static_cast<int>(idx % n), c1 = static_cast<int>((idx / n) % n),
                  c0 = static_cast<int>(idx / (static_cast<std::int64_t>(n) * n));
        const int crd[3] = {c0, c1, c2};
        double acc = 0;
        for (int ax = 0; ax < 3; ++ax) {
            const std::int64_t st = stride[ax];
            const double* wx = w[ax].data();
            const int m = crd[ax];
            // transpose of: row 0 = (-3, 4, -1)/2h; row n-1 = (1, -4, 3)/2h
            // (acting on offsets n-3, n-2, n-1); interior rows (-1, 0, 1)/2h
            double a = 0;
            if (m == 0) {
                a = -3.0 * wx[idx] - wx[idx + st];
            } else if (m == 1) {
                a = 4.0 * wx[idx - st] - wx[idx + st];
            } else if (m == 2) {
                a = -wx[idx - 2 * st] + wx[idx - st] - wx[idx + st];
            } else if (m == n - 3) {
                a = wx[idx - st] - wx[idx + st] + wx[idx + 2 * st];
            } else if (m == n - 2) {
                a = wx[idx - st] - 4.0 * wx[idx + st];
            } else if (m == n - 1) {
                a = wx[idx - st] + 3.0 * wx[idx];
            } else {
                a = wx[idx - st] - wx[idx + st];
            }
            acc += a * ih2;
        }
        out[idx] = acc;
    });
}

// shared core of L_gamma and L_tilde: given u and the Maxwellian weight m,
//   T_j = sum_i [ (Phi*m)_ij g_i - Phi_ij*(m g_i) ],  g = grad u
// and the operator value is w^{-1} * adj_grad( m T ).
inline void linearized_core(const VelocityGrid& vg, const std::vector<double>& u,
                            const std::vector<double>& m_weight, const std::vector<double>& w_out,
                            std::vector<double>& out) {
    auto tab = kernel_table(vg);
    std::array<std::vector<double>, 3> g;
    velocity_gradient(vg, u.data(), g);
    std::array<std::vector<double>, 3> S;
    for (int c = 0; c < 3; ++c) {
        S[c].assign(static_cast<std::size_t>(vg.size()), 0.0);
        for (std::int64_t i = 0; i < vg.size(); ++i)
            S[c][static_cast<std::size_t>(i)] = m_weight[static_cast<std::size_t>(i)] * g[c][static_cast<std::size_t>(i)];
    }
    KernelField A(vg);
    tab->conv_point(m_weight.data(), A);
    std::array<const double*, 3> Sp = {S[0].data(), S[1].data(), S[2].data()};
    std::array<std::vector<double>, 3> C;
    tab->conv_point_contract(Sp, C);
    std::array<std::vector<double>, 3> T;
    for (auto& c : T) c.assign(static_cast<std::size_t>(vg.size()), 0.0);
    parallel_for(0, vg.size(), [&](std::int64_t i) {
        const std::size_t s = static_cast<std::size_t>(i);
        for (int j = 0; j < 3; ++j) {
            double acc = -C[j][s];
            for (int k = 0; k < 3; ++k) acc += A.comp[sym_idx(k, j)][s] * g[k][s];
            T[j][s] = m_weight[s] * acc;
        }
    });
    gradient_adjoint(vg, T, out);
    for (std::int64_t i = 0; i < vg.size(); ++i)
        out[static_cast<std::size_t>(i)] /= w_out[static_cast<std::size_t>(i)];
}

inline std::vector<double> maxwellian_values(const VelocityGrid& vg, double q, double power) {
    std::vector<double> m(static_cast<std::size_t>(vg.size()));
    const double pref = std::pow(std::pow(q / (2.0 * M_PI), 1.5), power);
    for (std::int64_t i = 0; i < vg.size(); ++i)
        m[static_cast<std::size_t>(i)] = pref * std::exp(-0.5 * q * power * norm2(vg.node(i)));
    return m;
}

}  // namespace detail

// L_gamma h = -mu^{-1/2}{Q(mu^{1/2}h, mu) + Q(mu, mu^{1/2}h)}, realized through
// its weak form so the discrete operator is symmetric positive semidefinite
// and annihilates span{sqrt(mu), xi_k sqrt(mu), |xi|^2 sqrt(mu)} identically.
inline Field linearized_L(const Field& h, double gamma) {
    if (!(gamma > 0)) throw std::domain_error("linearized_L: gamma > 0 required");
    const auto& vg = h.vg;
    auto mu = detail::maxwellian_values(vg, gamma, 1.0);
    auto sqmu = detail::maxwellian_values(vg, gamma, 0.5);
    Field out(h.xg, vg, h.species, true);
    std::vector<double> u(static_cast<std::size_t>(vg.size()));
    std::vector<double> res;
    for (int ix = 0; ix < h.nx(); ++ix) {
        const double* p = h.slice(ix);
        for (std::int64_t i = 0; i < vg.size(); ++i)
            u[static_cast<std::size_t>(i)] = p[i] / sqmu[static_cast<std::size_t>(i)];
        detail::linearized_core(vg, u, mu, sqmu, res);
        std::memcpy(out.slice(ix), res.data(), sizeof(double) * static_cast<std::size_t>(vg.size()));
    }
    return out;
}

// L~_{gamma,q} psi = -mu_q^{-1/2}{Q(mu_q^{1/2}psi, mu_gamma) + Q(mu_gamma, mu_q^{1/2}psi)};
// reduces to L_gamma when q == gamma
inline Field linearized_L_tilde(const Field& psi, double gamma, double q) {
    if (!(gamma > 0) || !(q > 0)) throw std::domain_error("linearized_L_tilde: gamma, q > 0");
    const auto& vg = psi.vg;
    auto mu_g = detail::maxwellian_values(vg, gamma, 1.0);
    auto sq_q = detail::maxwellian_values(vg, q, 0.5);
    Field out(psi.xg, vg, psi.species, true);
    std::vector<double> u(static_cast<std::size_t>(vg.size()));
    std::vector<double> res;
    for (int ix = 0; ix < psi.nx(); ++ix) {
        const double* p = psi.slice(ix);
        for (std::int64_t i = 0; i < vg.size(); ++i) {
            const std::size_t s = static_cast<std::size_t>(i);
            u[s] = sq_q[s] * p[i] / mu_g[s];
        }
        detail::linearized_core(vg, u, mu_g, sq_q, res);
        std::memcpy(out.slice(ix), res.data(), sizeof(double) * static_cast<std::size_t>(vg.size()));
    }
    return out;
}

// M_{q,G} h = -mu_q^{-1/2} Q_{+-}^eps(G, mu_q^{1/2} h); dissipative sign, i.e.
// <M h, h> = <A P_- h, P_+ h> - eps^2 <B h, P_+ h> with P_pm = grad -+ q xi/2
inline Field linearized_M(const Field& h, double q, const Field& G_plus, double eps) {
    if (!(q > 0)) throw std::domain_error("linearized_M: q > 0");
    if (!(eps > 0) || eps > 1) throw std::invalid_argument("linearized_M: eps in (0,1]");
    const auto& vg = h.vg;
    Field out(h.xg, vg, h.species, true);
    for (int ix = 0; ix < h.nx(); ++ix) {
        FluxCoeffs cf;
        electron_cross_coeffs(vg, G_plus.vg, G_plus.slice(std::min(ix, G_plus.nx() - 1)), eps, cf);
        const double* p = h.slice(ix);
        std::array<std::vector<double>, 3> g;
        velocity_gradient(vg, p, g);
        // W_j = sum_i A_ij (g_i - q xi_i h / 2) - eps^2 B_j h
        std::array<std::vector<double>, 3> W;
        for (auto& c : W) c.assign(static_cast<std::size_t>(vg.size()), 0.0);
        parallel_for(0, vg.size(), [&](std::int64_t i) {
            const std::size_t s = static_cast<std::size_t>(i);
            const vec3 xi = vg.node(i);
            for (int j = 0; j < 3; ++j) {
                double acc = -eps * eps * cf.B[j][s] * p[i];
                for (int k = 0; k < 3; ++k)
                    acc += cf.A[detail::sym_idx(k, j)][s] * (g[k][s] - 0.5 * q * xi[k] * p[i]);
                W[j][s] = acc;
            }
        });
        // M h = adj_grad(W) + (q/2) xi . W
        std::vector<double> adj;
        detail::gradient_adjoint(vg, W, adj);
        double* o = out.slice(ix);
        parallel_for(0, vg.size(), [&](std::int64_t i) {
            const std::size_t s = static_cast<std::size_t>(i);
            const vec3 xi = vg.node(i);
            o[i] = adj[s] + 0.5 * q * (xi[0] * W[0][s] + xi[1] * W[1][s] + xi[2] * W[2][s]);
        });
    }
    return out;
}

// Gamma_q(h1, h2) = -mu_q^{-1/2} Q(mu_q^{1/2} h1, mu_q^{1/2} h2)
inline Field gamma_bilinear(const Field& h1, const Field& h2, double q) {
    if (!(q > 0)) throw std::domain_error("gamma_bilinear: q > 0");
    const auto& vg = h1.vg;
    auto sq = detail::maxwellian_values(vg, q, 0.5);
    Field out(h1.xg, vg, h1.species, true);
    std::vector<double> a(static_cast<std::size_t>(vg.size())), b(a), r(a);
    for (int ix = 0; ix < h1.nx(); ++ix) {
        const double* p1 = h1.slice(ix);
        const double* p2 = h2.slice(ix);
        for (std::int64_t i = 0; i < vg.size(); ++i) {
            const std::size_t s = static_cast<std::size_t>(i);
            a[s] = sq[s] * p1[i];
            b[s] = sq[s] * p2[i];
        }
        q_landau_bilinear_slice(vg, a.data(), b.data(), r.data());
        double* o = out.slice(ix);
        for (std::int64_t i = 0; i < vg.size(); ++i)
            o[i] = -r[static_cast<std::size_t>(i)] / sq[static_cast<std::size_t>(i)];
    }
    return out;
}

// ---- entropy dissipation ----------------------------------------------------------

struct EntropyResult {
    double symmetric = 0;  // >= 0 by construction
    double direct = 0;     // -int Q(F,F) ln F
    bool floored = false;  // some values were below the positivity floor
};

inline EntropyResult entropy_dissipation(const Field& F) {
    const auto& vg = F.vg;
    if (F.nx() != 1) throw std::invalid_argument("entropy_dissipation: velocity-only field");
    EntropyResult res;
    std::vector<double> Fl(F.values.begin(), F.values.end());
    for (double& v : Fl) {
        if (v < 1e-30) {
            v = 1e-30;
            res.floored = true;
        }
    }
    std::vector<double> lnF(Fl.size());
    for (std::size_t i = 0; i < Fl.size(); ++i) lnF[i] = std::log(Fl[i]);
    std::array<std::vector<double>, 3> g;
    velocity_gradient(vg, lnF.data(), g);
    const double w3 = vg.cell_volume();
    const std::int64_t N = vg.size();
    // symmetric double sum: (1/2) sum_{i,j} F_i F_j (g_i - g_j)^T Phi(v_i - v_j) (g_i - g_j)
    res.symmetric = 0.5 * w3 * w3 * block_sum_f(N, [&](std::int64_t i) {
        const vec3 vi = vg.node(i);
        const double fi = Fl[static_cast<std::size_t>(i)];
        const vec3 gi = {g[0][static_cast<std::size_t>(i)], g[1][static_cast<std::size_t>(i)],
                         g[2][static_cast<std::size_t>(i)]};
        double acc = 0;
        for (std::int64_t j = 0; j < N; ++j) {
            if (j == i) continue;
            const vec3 d = vi - vg.node(j);
            const vec3 dg = gi - vec3{g[0][static_cast<std::size_t>(j)], g[1][static_cast<std::size_t>(j)],
                                      g[2][static_cast<std::size_t>(j)]};
            const double r2 = norm2(d), r = std::sqrt(r2);
            const double dgd = dot(dg, d);
            acc += Fl[static_cast<std::size_t>(j)] * (norm2(dg) - dgd * dgd / r2) / r * fi;
        }
        return acc;
    });
    // direct form against the log-form operator
    std::vector<double> Q(static_cast<std::size_t>(N));
    q_landau_log_slice(vg, Fl.data(), Q.data());
    res.direct = -w3 * block_sum_f(N, [&](std::int64_t i) {
        return Q[static_cast<std::size_t>(i)] * lnF[static_cast<std::size_t>(i)];
    });
    return res;
}

}  // namespace vpl
