// Invariants of open-chart representatives (4.1.1) for the correspondences
// T_{p,i}: the matrices mu_1, mu_2, the block data X, G, F, W, the partition
// labels (special / rank-j), the 2x2 determinant-coordinate matrix, the
// special-set refinement for i = 1 and the explicit special-set
// parametrization for i = 2.  Signature is pinned to (r,s) = (i, g-i).

#pragma once

#include "atlas.hpp"

namespace heckep {

struct ClassifierDisagreement : ArithError {
    ClassifierDisagreement() : ArithError("the two special-set classifiers disagree") {}
};

enum class TpiLabel { DStar, Dj };
enum class WhichMu { Mu1, Mu2, Neither };

struct TpiInvariant {
    int g{0}, i{0};
    QMat mu1, mu2;  // mod p^2
    Quad det_mu1, det_mu2;  // mod p
    WhichMu which{WhichMu::Neither};
    bool swapped{false};  // labels computed with mu roles interchanged
    TpiLabel label{TpiLabel::DStar};
    int j{-1};             // rank of im X_1 mod p, when label == Dj
    QMat X1, X2;            // mod p^2, defined unless label == DStar
    ZMat G;                          // mu E conj(mu)^t, real symmetric mod p^2
    std::optional<ZMat> F;           // G^{-1} mod p^2 (exists iff det mu != 0 mod p)
    std::optional<ZMat> W;           // -(im X1)^{-1} im X2 mod p^2, when det im X1 != 0 mod p
    std::pair<int, int> d_pair{0, 0};  // (d1, d2) of the F_p^2-span of W_sigma mod p^2
    ZMat r_mat;                        // rows (re, im) of det mu_i mod p
    std::optional<SquareClass> detG22_class;  // square class of det G_22 mod p, when a unit
};

inline SignatureContext tpi_signature(int g, int i) { return SignatureContext(g, i, g - i); }

// mu_1 = [[-1, -C^t w], [A + C w, -1 - U w]], mu_2 = [[w, -A^t w], [A + C w, -1 - U w]]
inline std::pair<QMat, QMat> tpi_mu(const CosetRep& sigma, const FieldContext& ctx, int k) {
    int i = sigma.variant.i;
    int gm = sigma.A.rows();
    int g = gm + i;
    QMat mu1(g, g), mu2(g, g);
    ZMat at = sigma.A.transpose(), ct = sigma.C.transpose();
    for (int t = 0; t < i; ++t) {
        mu1(t, t) = ctx.qmake(-1, 0, k);
        mu2(t, t) = ctx.qmake(0, 1, k);
        for (int j = 0; j < gm; ++j) {
            mu1(t, i + j) = ctx.qmake(0, -ct(t, j), k);
            mu2(t, i + j) = ctx.qmake(0, -at(t, j), k);
        }
    }
    for (int t = 0; t < gm; ++t) {
        for (int j = 0; j < i; ++j) {
            Quad v = ctx.qmake(sigma.A(t, j), sigma.C(t, j), k);
            mu1(i + t, j) = v;
            mu2(i + t, j) = v;
        }
        for (int j = 0; j < gm; ++j) {
            Quad v = ctx.qmake((t == j ? -1 : 0), -sigma.U(t, j), k);
            mu1(i + t, i + j) = v;
            mu2(i + t, i + j) = v;
        }
    }
    return {mu1, mu2};
}

namespace detail {

// split R = [[X1, X2], [0, 1]] with diagonal blocks i, g-i; asserts the shape
inline void split_x_blocks(const QMat& R, int i, int g, const FieldContext& ctx, int k,
                           QMat& X1, QMat& X2) {
    int gm = g - i;
    X1 = QMat(i, i);
    X2 = QMat(i, gm);
    for (int t = 0; t < i; ++t) {
        for (int j = 0; j < i; ++j) X1(t, j) = R(t, j);
        for (int j = 0; j < gm; ++j) X2(t, j) = R(t, i + j);
    }
    Quad one = ctx.qmake(1, 0, k), zero = ctx.qmake(0, 0, k);
    for (int t = 0; t < gm; ++t)
        for (int j = 0; j < g; ++j) {
            Quad want = (j == i + t) ? one : zero;
            if (!(R(i + t, j) == want)) throw ArithError("X block decomposition shape violated");
        }
}

}  // namespace detail

inline TpiInvariant tpi_invariant(const CosetRep& sigma, const FieldContext& ctx) {
    if (sigma.variant.kind != Variant::Tpi || !sigma.open) throw NotOpenChart();
    TpiInvariant inv;
    inv.i = sigma.variant.i;
    inv.g = sigma.A.rows() + inv.i;
    int g = inv.g, i = inv.i;
    SignatureContext sig = tpi_signature(g, i);

    std::tie(inv.mu1, inv.mu2) = tpi_mu(sigma, ctx, 2);
    inv.det_mu1 = qm_det(qm_reduce(inv.mu1, ctx, 1), ctx, 1);
    inv.det_mu2 = qm_det(qm_reduce(inv.mu2, ctx, 1), ctx, 1);
    inv.r_mat = ZMat(2, 2);
    inv.r_mat(0, 0) = inv.det_mu1.re;
    inv.r_mat(0, 1) = inv.det_mu1.im;
    inv.r_mat(1, 0) = inv.det_mu2.re;
    inv.r_mat(1, 1) = inv.det_mu2.im;

    bool u1 = !ctx.qis_zero(inv.det_mu1), u2 = !ctx.qis_zero(inv.det_mu2);
    inv.which = u1 ? WhichMu::Mu1 : (u2 ? WhichMu::Mu2 : WhichMu::Neither);
    inv.swapped = !u1 && u2;

    // d-invariants of the F_p^2-span of the row module, mod p^2
    {
        ZMat jm = complex_structure(ctx, sig);
        ZMat rows(4 * g, 2 * g);
        ZMat jc = zmod(zmul(sigma.mat, jm), ctx.p2());
        for (int r = 0; r < 2 * g; ++r)
            for (int c = 0; c < 2 * g; ++c) {
                rows(r, c) = mod_reduce(sigma.mat(r, c), ctx.p2());
                rows(2 * g + r, c) = jc(r, c);
            }
        auto mod = module_of_rows(rows, ctx, 2);
        inv.d_pair = {mod.d1, mod.d2};
    }

    if (inv.which == WhichMu::Neither) {
        inv.label = TpiLabel::DStar;
        return inv;
    }

    const QMat& mua = inv.swapped ? inv.mu2 : inv.mu1;
    const QMat& mub = inv.swapped ? inv.mu1 : inv.mu2;
    QMat R = qm_mul(mub, qm_inv(mua, ctx, 2), ctx, 2);
    detail::split_x_blocks(R, i, g, ctx, 2, inv.X1, inv.X2);
    inv.label = TpiLabel::Dj;
    inv.j = rank_fp(zmod(qm_im(inv.X1), ctx.p()), ctx.p());

    // when both determinants are units the two mu-routes must agree on j
    if (u1 && u2) {
        QMat R2 = qm_mul(inv.mu1, qm_inv(inv.mu2, ctx, 2), ctx, 2);
        QMat Y1, Y2;
        detail::split_x_blocks(R2, i, g, ctx, 2, Y1, Y2);
        if (rank_fp(zmod(qm_im(Y1), ctx.p()), ctx.p()) != inv.j) throw ClassifierDisagreement();
    }

    QMat e = qm_from_z(sig.e_rs(), ctx, 2);
    QMat Gq = qm_mul(qm_mul(mua, e, ctx, 2), qm_conj(mua, ctx, 2).transpose(), ctx, 2);
    assert(qm_is_real(Gq));
    inv.G = qm_re(Gq);
    if (rank_fp(inv.G, ctx.p()) == g) inv.F = zinv_mod(inv.G, ctx.p(), 2);
    {
        ZMat imx1 = zmod(qm_im(inv.X1), ctx.p());
        if (i > 0 && rank_fp(imx1, ctx.p()) == i) {
            ZMat inv_imx1 = zinv_mod(qm_im(inv.X1), ctx.p(), 2);
            inv.W = zmod(zscale(-1, zmul(inv_imx1, qm_im(inv.X2))), ctx.p2());
        }
    }
    {
        ZMat g22(g - i, g - i);
        for (int t = 0; t < g - i; ++t)
            for (int jj = 0; jj < g - i; ++jj) g22(t, jj) = inv.G(i + t, i + jj);
        i64 d = mod_reduce((i64)(zdet_exact(zmod(g22, ctx.p())) % ctx.p()), ctx.p());
        if (d != 0) inv.detG22_class = ctx.square_class(d);
    }
    return inv;
}

// ---- special-set refinement for g = 3, i = 1 -------------------------------

enum class DStarKind { D0star, D1star };

// ord_p of a quad value known at precision p^2, capped at 2
inline int quad_ord2(Quad q, const FieldContext& ctx) {
    if (!ctx.qis_zero(ctx.qreduce(q, 1))) return 0;
    if (!ctx.qis_zero(q)) return 1;
    return 2;  // >= 2
}

// classifier 1: ord_p det(mu_1 mod p^2) >= 2  <=>  D0star.  On the A = C = 0
// slice det mu_1 = -det(1 + U sqrt(-Delta)), recovering the determinant-of-U
// criterion; the mu_2 route must give the same order.
// classifier 2: (d1, d2) of the F_p^2-span is (2,4)  <=>  D0star, (2,6)  <=>  D1star.
// both are computed and must agree
inline DStarKind dstar_split(const CosetRep& sigma, const TpiInvariant& inv, const FieldContext& ctx) {
    if (inv.label != TpiLabel::DStar || inv.g != 3 || inv.i != 1) throw NotOpenChart();
    (void)sigma;
    int o1 = quad_ord2(qm_det(inv.mu1, ctx, 2), ctx);
    int o2 = quad_ord2(qm_det(inv.mu2, ctx, 2), ctx);
    if (o1 == 0 || o1 != o2) throw ClassifierDisagreement();
    DStarKind by_ord = o1 >= 2 ? DStarKind::D0star : DStarKind::D1star;
    DStarKind by_d = inv.d_pair == std::make_pair(2, 4) ? DStarKind::D0star : DStarKind::D1star;
    if ((inv.d_pair != std::make_pair(2, 4) && inv.d_pair != std::make_pair(2, 6)) || by_ord != by_d)
        throw ClassifierDisagreement();
    return by_ord;
}

// ---- special set for g = 3, i = 2 ------------------------------------------

struct DStarI2 {
    bool member{false};
    // parameters of the explicit description, valid when member:
    // A = (a1 a2) with a1^2 + a2^2 = 1, U = 0, C = (eps r a2, -eps r a1), r = 1/sqrt(Delta)
    i64 a1{0}, a2{0}, eps{0};
};

inline DStarI2 dstar_i2_test(const CosetRep& sigma, const TpiInvariant& inv, const FieldContext& ctx) {
    if (inv.g != 3 || inv.i != 2) throw NotOpenChart();
    DStarI2 out;
    out.member = inv.which == WhichMu::Neither;
    if (!out.member) return out;
    i64 p = ctx.p();
    auto sd = ctx.fp_sqrt(ctx.delta());
    if (!sd || *sd == 0) throw ArithError("special set requires sqrt(Delta) in F_p");
    i64 r = inv_mod(*sd, p);
    i64 a1 = mod_reduce(sigma.A(0, 0), p), a2 = mod_reduce(sigma.A(0, 1), p);
    i64 c1 = mod_reduce(sigma.C(0, 0), p), c2 = mod_reduce(sigma.C(0, 1), p);
    if (mod_reduce(a1 * a1 + a2 * a2, p) != 1 || mod_reduce(sigma.U(0, 0), p) != 0)
        throw ClassifierDisagreement();
    i64 eps;
    if (a2 != 0)
        eps = mul_mod(c1, inv_mod(mul_mod(r, a2, p), p), p);
    else
        eps = mod_reduce(-mul_mod(c2, inv_mod(mul_mod(r, a1, p), p), p), p);
    if (eps != 1 && eps != p - 1) throw ClassifierDisagreement();
    if (c1 != mul_mod(eps, mul_mod(r, a2, p), p) ||
        c2 != mod_reduce(-(i64)mul_mod(eps, mul_mod(r, a1, p), p), p))
        throw ClassifierDisagreement();
    out.a1 = a1;
    out.a2 = a2;
    out.eps = eps == 1 ? 1 : -1;
    return out;
}

// ---- projection W -> W/pW as a point of G(g-i, 2g) --------------------------

inline std::vector<i64> pr_projection(const CosetRep& sigma, const FieldContext& ctx) {
    if (sigma.variant.kind != Variant::Tpi || !sigma.open) throw NotOpenChart();
    auto w = w_subspace(sigma, ctx, 2);
    // rows with unit pivots survive reduction mod p as a basis of the image
    std::vector<int> unit_rows;
    for (int r = 0; r < w.gens.rows(); ++r) {
        i64 lead = 0;
        for (int j = 0; j < w.gens.cols() && lead == 0; ++j) lead = w.gens(r, j);
        if (lead % ctx.p() != 0) unit_rows.push_back(r);
    }
    ZMat basis((int)unit_rows.size(), w.gens.cols());
    for (size_t t = 0; t < unit_rows.size(); ++t)
        for (int j = 0; j < w.gens.cols(); ++j) basis((int)t, j) = mod_reduce(w.gens(unit_rows[t], j), ctx.p());
    return pluecker(basis, ctx.p());
}

}  // namespace heckep
