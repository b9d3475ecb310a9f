// Invariants of open-chart representatives sigma(s) for the correspondence
// T_p: the matrices t and T, the dimension partition label, the good/bad/
// trivial classification, the two linear forms behind det t, the hyperplane
// partition point and the orbit of W_sigma under the complex-structure action.

#pragma once

#include "atlas.hpp"

namespace heckep {

struct OnBaseLocus : ArithError {
    OnBaseLocus() : ArithError("sigma lies on the base locus f1 = f2 = 0") {}
};

enum class TpClass { Good, Bad, Trivial };

struct TpInvariant {
    QMat t_mat;    // E - sqrt(-Delta) s E_rs, mod p^2
    ZMat T_mat;    // conj(t) E t^t, real symmetric, mod p^2
    int rank{0};   // rank of T mod p
    int dpart{0};  // j with sigma in D_j, = rank + g
    QFormClass qclass;
    i64 f1{0}, f2{0};                        // det(t mod p) = f1 + f2 sqrt(-Delta)
    std::optional<std::pair<i64, i64>> hpart;  // (f1 : f2) normalized, iff nonzero
    TpClass cls{TpClass::Bad};
};

inline QMat tp_t_matrix(const ZMat& s, const FieldContext& ctx, const SignatureContext& sig, int k) {
    ZMat se = zmul(s, sig.e_rs());
    QMat t(sig.g, sig.g);
    for (int i = 0; i < sig.g; ++i)
        for (int j = 0; j < sig.g; ++j) t(i, j) = ctx.qmake(i == j ? 1 : 0, -se(i, j), k);
    return t;
}

// normalized point of P^1: (1 : f2/f1) when f1 != 0, else (0 : 1)
inline std::pair<i64, i64> p1_normalize(i64 f1, i64 f2, i64 p) {
    f1 = mod_reduce(f1, p);
    f2 = mod_reduce(f2, p);
    if (f1 != 0) return {1, mul_mod(f2, inv_mod(f1, p), p)};
    return {0, 1};
}

inline TpInvariant tp_invariant(const CosetRep& sigma, const FieldContext& ctx,
                                const SignatureContext& sig) {
    if (sigma.variant != Variant::tp() || !sigma.open) throw NotOpenChart();
    TpInvariant inv;
    inv.t_mat = tp_t_matrix(sigma.s, ctx, sig, 2);
    QMat e = qm_from_z(sig.e_rs(), ctx, 2);
    QMat T = qm_mul(qm_mul(qm_conj(inv.t_mat, ctx, 2), e, ctx, 2), inv.t_mat.transpose(), ctx, 2);
    assert(qm_is_real(T));
    inv.T_mat = qm_re(T);
    inv.rank = rank_fp(inv.T_mat, ctx.p());
    inv.dpart = inv.rank + sig.g;
    inv.qclass = qform_class(zmod(inv.T_mat, ctx.p()), ctx, /*up_to_scalar=*/true);
    Quad dt = qm_det(qm_reduce(inv.t_mat, ctx, 1), ctx, 1);
    inv.f1 = dt.re;
    inv.f2 = dt.im;
    if (inv.f1 != 0 || inv.f2 != 0) inv.hpart = p1_normalize(inv.f1, inv.f2, ctx.p());
    if (inv.dpart == 2 * sig.g)
        inv.cls = TpClass::Good;
    else if (inv.dpart == sig.g && sig.g % 2 == 0)
        inv.cls = TpClass::Trivial;
    else
        inv.cls = TpClass::Bad;
    return inv;
}

inline std::pair<i64, i64> f_forms(const CosetRep& sigma, const FieldContext& ctx,
                                   const SignatureContext& sig) {
    if (sigma.variant != Variant::tp() || !sigma.open) throw NotOpenChart();
    Quad dt = qm_det(tp_t_matrix(sigma.s, ctx, sig, 1), ctx, 1);
    return {dt.re, dt.im};
}

inline std::pair<i64, i64> h_part(const CosetRep& sigma, const FieldContext& ctx,
                                  const SignatureContext& sig) {
    auto [f1, f2] = f_forms(sigma, ctx, sig);
    if (f1 == 0 && f2 == 0) throw OnBaseLocus();
    return p1_normalize(f1, f2, ctx.p());
}

// coset representatives of F_p^2^* / F_p^*: 1 and a + sqrt(-Delta), a in F_p
inline std::vector<Quad> f_action_classes(const FieldContext& ctx) {
    std::vector<Quad> reps;
    reps.push_back(Quad{1, 0});
    for (i64 a = 0; a < ctx.p(); ++a) reps.push_back(Quad{a, 1});
    return reps;
}

// orbit of W_sigma under the complex-structure action, as deduplicated
// Pluecker points in class-representative order
inline std::vector<std::vector<i64>> f_orbit(const CosetRep& sigma, const FieldContext& ctx,
                                             const SignatureContext& sig) {
    if (sigma.variant != Variant::tp() || !sigma.open) throw NotOpenChart();
    auto w = w_subspace(sigma, ctx, 1);
    std::vector<std::vector<i64>> orbit;
    for (Quad c : f_action_classes(ctx)) {
        ZMat img = complex_action(w.gens, c, ctx, sig, 1);
        auto pt = pluecker(img, ctx.p());
        if (std::find(orbit.begin(), orbit.end(), pt) == orbit.end()) orbit.push_back(pt);
    }
    return orbit;
}

// Fit f1, f2 as F_p-linear forms in the Pluecker coordinates over all open
// sigma; the coefficient vectors realize the epsilon constants implicitly.
// Returns (u, v) with pluecker(W_sigma) . u = f1 and . v = f2 on the chart.
struct FittedFForms {
    std::vector<i64> u, v;
    int span_rank{0};  // rank of the Pluecker point span used in the fit
};

inline FittedFForms fit_f_linear_forms(const FieldContext& ctx, const SignatureContext& sig) {
    auto atlas = enum_sg_open(ctx, sig.g);
    int ncoord = 1;
    {
        // C(2g, g)
        int n = 2 * sig.g, r = sig.g;
        i64 c = 1;
        for (int i = 0; i < r; ++i) c = c * (n - i) / (i + 1);
        ncoord = (int)c;
    }
    // solve the joint linear system [P | f1 | f2] by elimination over F_p
    std::vector<std::vector<i64>> rowsys;
    for (const auto& rep : atlas) {
        auto w = w_subspace(rep, ctx, 1);
        auto pt = pluecker(w.gens, ctx.p());
        auto [f1, f2] = f_forms(rep, ctx, sig);
        std::vector<i64> row = pt;
        row.push_back(mod_reduce(f1, ctx.p()));
        row.push_back(mod_reduce(f2, ctx.p()));
        rowsys.push_back(std::move(row));
    }
    i64 p = ctx.p();
    int m = ncoord + 2;
    // gaussian elimination to reduced echelon
    int rank = 0;
    for (int col = 0; col < ncoord && rank < (int)rowsys.size(); ++col) {
        int piv = -1;
        for (int i = rank; i < (int)rowsys.size(); ++i)
            if (rowsys[i][col] % p != 0) {
                piv = i;
                break;
            }
        if (piv < 0) continue;
        std::swap(rowsys[rank], rowsys[piv]);
        i64 inv = inv_mod(rowsys[rank][col], p);
        for (int j = 0; j < m; ++j) rowsys[rank][j] = mul_mod(rowsys[rank][j], inv, p);
        for (int i = 0; i < (int)rowsys.size(); ++i) {
            if (i == rank || rowsys[i][col] == 0) continue;
            i64 f = rowsys[i][col];
            for (int j = 0; j < m; ++j) rowsys[i][j] = mod_reduce(rowsys[i][j] - f * rowsys[rank][j], p);
        }
        ++rank;
    }
    // consistency: all rows below the rank must be identically zero
    for (int i = rank; i < (int)rowsys.size(); ++i)
        for (int j = 0; j < m; ++j)
            if (rowsys[i][j] != 0) throw ArithError("f-forms are not linear in Pluecker coordinates");
    FittedFForms fit;
    fit.span_rank = rank;
    fit.u.assign(ncoord, 0);
    fit.v.assign(ncoord, 0);
    for (int r = 0; r < rank; ++r) {
        int lead = -1;
        for (int j = 0; j < ncoord; ++j)
            if (rowsys[r][j] != 0) {
                lead = j;
                break;
            }
        if (lead < 0) continue;
        fit.u[lead] = rowsys[r][ncoord];
        fit.v[lead] = rowsys[r][ncoord + 1];
    }
    return fit;
}

inline i64 eval_linear_form(const std::vector<i64>& coeff, const std::vector<i64>& pt, i64 p) {
    if (coeff.size() != pt.size()) throw DimensionMismatch();
    i64 acc = 0;
    for (size_t i = 0; i < coeff.size(); ++i) acc = mod_reduce(acc + coeff[i] * pt[i], p);
    return acc;
}

}  // namespace heckep
