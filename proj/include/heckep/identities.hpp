// Identity batteries over whole atlases: each function scans a family of
// representatives, re-derives an identity from independent routes and
// collects human-readable failure strings.  Shared by the unit tests, the
// self-test runner and the acceptance suite.

#pragma once

#include <random>

#include "tp_invariants.hpp"
#include "tpi_invariants.hpp"

namespace heckep::checks {

using Failures = std::vector<std::string>;

// rank T(sigma mod p) = dim_{F_p}(F_p^2 W_sigma) - g on the open chart, with
// the dimension computed independently by stacking the complex image
inline Failures tp_rank_dimension_law(const FieldContext& ctx, const SignatureContext& sig) {
    Failures fails;
    auto atlas = enum_sg_open(ctx, sig.g);
    for (size_t idx = 0; idx < atlas.size(); ++idx) {
        const auto& rep = atlas[idx];
        auto inv = tp_invariant(rep, ctx, sig);
        auto w = w_subspace(rep, ctx, 1);
        ZMat jw = complex_action(w.gens, Quad{0, 1}, ctx, sig, 1);
        ZMat stacked(2 * sig.g, 2 * sig.g);
        for (int i = 0; i < sig.g; ++i)
            for (int j = 0; j < 2 * sig.g; ++j) {
                stacked(i, j) = w.gens(i, j);
                stacked(sig.g + i, j) = jw(i, j);
            }
        int dim = rank_fp(stacked, ctx.p());
        if (inv.rank != dim - sig.g)
            fails.push_back("rank/dim law fails at open rep " + std::to_string(idx));
        if (dim % 2 != 0) fails.push_back("odd complex span dimension at rep " + std::to_string(idx));
        if (inv.dpart != dim) fails.push_back("dpart mismatch at rep " + std::to_string(idx));
    }
    return fails;
}

// T = E + Delta s E s agrees with conj(t) E t^t; det t != 0 <=> det T != 0
// <=> sigma in D_{2g}; and det(t mod p) = f1 + f2 sqrt(-Delta)
inline Failures tp_t_identities(const FieldContext& ctx, const SignatureContext& sig) {
    Failures fails;
    auto atlas = enum_sg_open(ctx, sig.g);
    QMat e2 = qm_from_z(sig.e_rs(), ctx, 2);
    for (size_t idx = 0; idx < atlas.size(); ++idx) {
        const auto& rep = atlas[idx];
        auto inv = tp_invariant(rep, ctx, sig);
        ZMat ses = zmul(zmul(rep.s, sig.e_rs()), rep.s);
        ZMat want = zmod(zadd(sig.e_rs(), zscale(ctx.delta(), ses)), ctx.p2());
        if (zmod(inv.T_mat, ctx.p2()) != want)
            fails.push_back("T formula mismatch at rep " + std::to_string(idx));
        bool t_unit = !(inv.f1 == 0 && inv.f2 == 0);
        bool T_unit = rank_fp(inv.T_mat, ctx.p()) == sig.g;
        bool in_top = inv.dpart == 2 * sig.g;
        if (t_unit != T_unit || T_unit != in_top)
            fails.push_back("det t / det T / top part disagree at rep " + std::to_string(idx));
    }
    return fails;
}

// the G, F, X, W block identities over a full open T_{p,i} atlas
inline Failures tpi_block_identities(const FieldContext& ctx, int g, int i) {
    Failures fails;
    i64 p = ctx.p(), p2 = ctx.p2();
    auto atlas = enum_sgi_open(ctx, g, i);
    int gm = g - i;
    for (size_t idx = 0; idx < atlas.size(); ++idx) {
        const auto& rep = atlas[idx];
        auto inv = tpi_invariant(rep, ctx);
        auto tag = [&](const std::string& what) {
            fails.push_back(what + " at S(" + std::to_string(g) + "," + std::to_string(i) +
                            ") rep " + std::to_string(idx));
        };
        if (inv.label == TpiLabel::DStar) continue;

        // G real symmetric (realness is asserted in construction)
        if (inv.G != inv.G.transpose()) tag("G not symmetric");

        if (inv.F) {
            const ZMat& F = *inv.F;
            // im X1 = -F11 and im X2 = -F12 exactly mod p^2 on the mu_1 route;
            // the interchanged route flips the sign.  Either way the two
            // expressions of W below coincide.
            i64 sgn = inv.swapped ? 1 : -1;
            ZMat imx1 = zmod(qm_im(inv.X1), p2), imx2 = zmod(qm_im(inv.X2), p2);
            for (int a = 0; a < i; ++a)
                for (int b = 0; b < i; ++b)
                    if (imx1(a, b) != mod_reduce(sgn * F(a, b), p2)) tag("im X1 != -F11");
            for (int a = 0; a < i; ++a)
                for (int b = 0; b < gm; ++b)
                    if (imx2(a, b) != mod_reduce(sgn * F(a, i + b), p2)) tag("im X2 != -F12");

            // det im X1 unit <=> det G22 unit
            ZMat g22(gm, gm);
            for (int a = 0; a < gm; ++a)
                for (int b = 0; b < gm; ++b) g22(a, b) = inv.G(i + a, i + b);
            bool x1_unit = rank_fp(zmod(qm_im(inv.X1), p), p) == i;
            bool g22_unit = rank_fp(g22, p) == gm;
            if (x1_unit != g22_unit) tag("det im X1 / det G22 equivalence");

            if (inv.W) {
                const ZMat& W = *inv.W;
                ZMat F11(i, i), F12(i, gm), F21(gm, i), F22(gm, gm), G12(i, gm), G11(i, i);
                for (int a = 0; a < i; ++a)
                    for (int b = 0; b < i; ++b) {
                        F11(a, b) = F(a, b);
                        G11(a, b) = inv.G(a, b);
                    }
                for (int a = 0; a < i; ++a)
                    for (int b = 0; b < gm; ++b) {
                        F12(a, b) = F(a, i + b);
                        G12(a, b) = inv.G(a, i + b);
                    }
                for (int a = 0; a < gm; ++a)
                    for (int b = 0; b < i; ++b) F21(a, b) = F(i + a, b);
                for (int a = 0; a < gm; ++a)
                    for (int b = 0; b < gm; ++b) F22(a, b) = F(i + a, i + b);
                if (zmod(zadd(zmul(F11, W), F12), p2) != ZMat(i, gm)) tag("F11 W + F12 != 0");
                if (zmod(zmul(W, g22), p2) != zmod(G12, p2)) tag("W G22 != G12");
                if (g22_unit) {
                    ZMat lhs = zmod(zadd(zmul(F21, W), F22), p2);
                    if (lhs != zinv_mod(g22, p, 2)) tag("F21 W + F22 != G22^{-1}");
                    // det G = det G22 det(G11 - W G22 W^t) mod p^2
                    i64 dg = mod_reduce((i64)(zdet_exact(zmod(inv.G, p2)) % p2), p2);
                    ZMat inner = zmod(zsub(G11, zmul(zmul(W, g22), W.transpose())), p2);
                    i64 rhs = mul_mod(mod_reduce((i64)(zdet_exact(zmod(g22, p2)) % p2), p2),
                                      mod_reduce((i64)(zdet_exact(inner) % p2), p2), p2);
                    if (dg != rhs) tag("det G factorization");
                }
            }

            // kernel transfer: no nonzero D kills both im X1 and im X2, i.e.
            // the i x g block (im X1 | im X2) has full row rank
            ZMat joint(i, g);
            ZMat ix1 = zmod(qm_im(inv.X1), p), ix2 = zmod(qm_im(inv.X2), p);
            for (int a = 0; a < i; ++a) {
                for (int b = 0; b < i; ++b) joint(a, b) = ix1(a, b);
                for (int b = 0; b < gm; ++b) joint(a, i + b) = ix2(a, b);
            }
            if (rank_fp(joint, p) != i) tag("common left kernel of (im X1 | im X2)");
        }
    }
    return fails;
}

// for g = 3, i = 1: the orthogonal-vector identities of a symmetric invertible
// F with F11 = 0, applied to every rep where that happens
inline Failures tpi_f11_zero_identities(const FieldContext& ctx) {
    Failures fails;
    i64 p = ctx.p();
    auto atlas = enum_sgi_open(ctx, 3, 1);
    for (size_t idx = 0; idx < atlas.size(); ++idx) {
        const auto& rep = atlas[idx];
        auto inv = tpi_invariant(rep, ctx);
        if (inv.label != TpiLabel::Dj || !inv.F) continue;
        ZMat F = zmod(*inv.F, p), G = zmod(inv.G, p);
        if (F(0, 0) != 0) continue;
        auto tag = [&](const std::string& what) {
            fails.push_back(what + " at S(3,1) rep " + std::to_string(idx));
        };
        i64 detF = mod_reduce((i64)(zdet_exact(F) % p), p);
        // row F12 = (F(0,1), F(0,2)); column F21; G21 column; F22 2x2
        i64 f12o[2] = {mod_reduce(-F(0, 2), p), F(0, 1)};
        ZMat F22(2, 2);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) F22(a, b) = F(1 + a, 1 + b);
        // (1) F12^O F22 F12^{O t} = -det F
        i64 q = 0;
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) q = mod_reduce(q + f12o[a] * F22(a, b) * f12o[b], p);
        if (q != mod_reduce(-detF, p)) tag("F12-orthogonal quadratic value");
        // (2) F21^O F21^{O t} = (-1/det F) G22
        i64 f21o[2] = {mod_reduce(-F(2, 0), p), F(1, 0)};
        i64 scale = mod_reduce(-inv_mod(detF, p), p);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                if (mod_reduce(f21o[a] * f21o[b], p) != mul_mod(scale, G(1 + a, 1 + b), p))
                    tag("F21-orthogonal outer product");
        // (3) F22 F12^{O t} = -det F * G21^O
        i64 g21o[2] = {mod_reduce(-G(2, 0), p), G(1, 0)};
        for (int a = 0; a < 2; ++a) {
            i64 lhs = mod_reduce(F22(a, 0) * f12o[0] + F22(a, 1) * f12o[1], p);
            if (lhs != mod_reduce(-detF * g21o[a], p)) tag("F22 against F12-orthogonal");
        }
        // (4) det(F21, G21^O) = 1
        i64 det2 = mod_reduce(F(1, 0) * g21o[1] - F(2, 0) * g21o[0], p);
        if (det2 != 1) tag("unimodular pairing of F21 and G21-orthogonal");
    }
    return fails;
}

// i = 1 double degeneration drops the rank of the long block to <= g-2;
// exhaustive over the atlas for g = 3, randomized search for g = 4
inline Failures tpi_rank_drop(const FieldContext& ctx, int g, int samples, u_int64_t seed) {
    Failures fails;
    i64 p = ctx.p(), p2 = ctx.p2();
    std::mt19937_64 rng(seed);
    int gm = g - 1;
    int tried = 0, found = 0;
    while (tried < samples) {
        ++tried;
        ZMat A(gm, 1), C(gm, 1), U(gm, gm);
        for (auto& x : A.data()) x = (i64)(rng() % p);
        for (auto& x : C.data()) x = (i64)(rng() % p);
        for (int t = 0; t < gm; ++t)
            for (int j = t; j < gm; ++j) U(t, j) = (i64)(rng() % p2);
        ZMat comm = zsub(zmul(C, A.transpose()), zmul(A, C.transpose()));
        for (int t = 0; t < gm; ++t)
            for (int j = 0; j < t; ++j) U(t, j) = U(j, t) + comm(t, j);
        auto rep = sigma_tpi(A, C, U, 1, ctx);
        auto [mu1, mu2] = tpi_mu(rep, ctx, 1);
        if (!ctx.qis_zero(qm_det(mu1, ctx, 1)) || !ctx.qis_zero(qm_det(mu2, ctx, 1))) continue;
        ++found;
        // bottom block (A + C w | -1 - U w), size (g-1) x g
        QMat block(gm, g);
        for (int t = 0; t < gm; ++t) {
            block(t, 0) = ctx.qmake(A(t, 0), C(t, 0), 1);
            for (int j = 0; j < gm; ++j) block(t, 1 + j) = ctx.qmake(t == j ? -1 : 0, -U(t, j), 1);
        }
        if (qm_rank(block, ctx) > g - 2)
            fails.push_back("rank of degenerate long block exceeds g-2 (g=" + std::to_string(g) + ")");
    }
    if (found == 0) fails.push_back("no doubly-degenerate sample found (g=" + std::to_string(g) + ")");
    return fails;
}

// g = 3, i = 2: det mu_1 != 0 mod p implies im X_1 != 0 mod p; hence no
// rank-zero part exists on the open chart
inline Failures tpi_i2_no_rank_zero(const FieldContext& ctx) {
    Failures fails;
    auto atlas = enum_sgi_open(ctx, 3, 2);
    for (size_t idx = 0; idx < atlas.size(); ++idx) {
        auto inv = tpi_invariant(atlas[idx], ctx);
        if (inv.label == TpiLabel::Dj && inv.j == 0)
            fails.push_back("rank-zero part nonempty at S(3,2) rep " + std::to_string(idx));
    }
    return fails;
}

}  // namespace heckep::checks
