// Degree of the second projection for T_p components: for every sigma' in the
// full atlas, decide whether some unitary g with unit similitude makes
// sigma' sigma alpha(g) land in p * M(Z_p).
//
// Writing X = sigma' sigma alpha(g) / p, X is integral with unit determinant,
// so alpha(g) = p (sigma' sigma)^{-1} X has exactly the elementary divisors of
// p (sigma' sigma)^{-1}.  A unit-similitude g lies in a double coset
// K a_m K of the hyperspecial K = GU(Z_p), and alpha(K a_m K) has divisor
// profile (p^-m, p^-m, 1, 1, p^m, p^m).  Matching profiles by the double
// coset type of sigma' sigma:
//   type i=0 or i=2:  profile mismatch, infeasible outright;
//   type i=3:         m = 0, i.e. g integral: decided against the GU roster;
//   type i=1:         m = 1: g = k1 a0 k2 with a0 a fixed cell representative;
//                     the right factor k2 is absorbed into p M(Z_p), leaving a
//                     linear feasibility problem over k1 mod p^2.

#pragma once

#include "equivalence.hpp"

namespace heckep {

enum class Pi2Verdict { Feasible, Infeasible, Unknown };

struct Pi2Entry {
    Pi2Verdict verdict{Pi2Verdict::Unknown};
    bool integral_witness{false};
    std::optional<UnitaryElement> witness;  // integral g, or the k1 of g = k1 a0
    long long scanned{0};
};

namespace pi2detail {

// cell representative a0 with lambda = 1 and divisors of p a0 equal (1, p, p^2):
// conjugate diag(1/p, 1, p) from a Witt basis of the Hermitian form back to
// E_rs = diag(1, 1, -1); the base change is unimodular for odd p.
// p * a0 = 1/2 [[1+p^2, 0, 1-p^2], [0, 2p, 0], [1-p^2, 0, 1+p^2]]
inline ZMat cell_rep_times_p(i64 p) {
    ZMat m(3, 3);
    // entries of 2 * p * a0, divided by 2 exactly over Z via the inverse of 2
    // being unavailable in Z: keep integrality by using the closed form with
    // explicit halves: 1 +- p^2 is even iff p odd, so the division is exact
    i64 a = (1 + p * p) / 2, b = (1 - p * p) / 2;
    assert((1 + p * p) % 2 == 0);
    m(0, 0) = a;
    m(0, 2) = b;
    m(1, 1) = p;
    m(2, 0) = b;
    m(2, 2) = a;
    return m;
}

}  // namespace pi2detail

// decide whether sigma' admits a witness for the fixed sigma
inline Pi2Entry pi2_feasible(const CosetRep& sp, const CosetRep& s, const FieldContext& ctx,
                             const SignatureContext& sig) {
    i64 p = ctx.p(), p2 = ctx.p2();
    int g = sig.g;
    int nvar = 2 * g * g;
    Pi2Entry out;
    if (g != 3) throw DimensionMismatch();  // cell analysis transcribed for genus 3
    ZMat prod = zmul(sp.mat, s.mat);
    Variant type = double_coset_type(prod, ctx);
    assert(type.kind == Variant::Tpi);
    if (type.i == 0 || type.i == 2) {
        out.verdict = Pi2Verdict::Infeasible;  // no unitary cell has this profile
        return out;
    }

    // ---- integral case (the m = 0 cell) ----
    ZMat m1(4 * g * g, nvar);
    {
        for (int which = 0; which < 2; ++which)
            for (int r = 0; r < g; ++r)
                for (int cc = 0; cc < g; ++cc) {
                    ZMat h(g, g), k(g, g);
                    (which == 0 ? h : k)(r, cc) = 1;
                    ZMat col = zmul(prod, alpha_embed(h, k, ctx.delta(), sig));
                    int v = which * g * g + r * g + cc;
                    for (int i = 0; i < 2 * g; ++i)
                        for (int j = 0; j < 2 * g; ++j)
                            m1(i * 2 * g + j, v) = mod_reduce(col(i, j), p);
                }
    }
    if (type.i == 3) {
        ZMat k0 = kernel_fp(m1, p);
        bool ruled_out = k0.rows() == 0;
        if (!ruled_out) {
            // common left/right kernel over F_p^2 rules out unit determinants
            for (int side = 0; side < 2 && !ruled_out; ++side) {
                QMat stacked(k0.rows() * g, g);
                for (int t = 0; t < k0.rows(); ++t)
                    for (int r = 0; r < g; ++r)
                        for (int c = 0; c < g; ++c) {
                            Quad q = ctx.qmake(k0(t, r * g + c), k0(t, g * g + r * g + c), 1);
                            if (side == 0)
                                stacked(t * g + c, r) = q;  // transpose: left kernels
                            else
                                stacked(t * g + r, c) = q;
                        }
                if (qm_rank(stacked, ctx) < g) ruled_out = true;
            }
        }
        if (ruled_out) {
            out.verdict = Pi2Verdict::Infeasible;
            return out;
        }
        const auto& roster = gu_roster(ctx, sig);
        for (const auto& u : roster.elems()) {
            ++out.scanned;
            std::vector<i64> z(nvar);
            for (int r = 0; r < g; ++r)
                for (int c = 0; c < g; ++c) {
                    z[r * g + c] = u.h(r, c);
                    z[g * g + r * g + c] = u.k(r, c);
                }
            bool ok = true;
            for (int row = 0; row < m1.rows() && ok; ++row) {
                i64 acc = 0;
                for (int v = 0; v < nvar; ++v)
                    if (m1(row, v) != 0) acc += m1(row, v) * z[v];
                ok = acc % p == 0;
            }
            if (ok) {
                out.verdict = Pi2Verdict::Feasible;
                out.integral_witness = true;
                out.witness = u;
                return out;
            }
        }
        out.verdict = Pi2Verdict::Infeasible;
        return out;
    }

    // ---- the m = 1 cell: g = k1 a0 k2, conditions mod p^2 on k1 ----
    ZMat pa0 = pi2detail::cell_rep_times_p(p);
    ZMat A0 = alpha_embed(pa0, ZMat(3, 3), ctx.delta(), sig);  // p * alpha(a0)
    // mod-p filter on the leading part: sigma' sigma alpha(k) A0 = 0 mod p
    ZMat f1(4 * g * g, nvar);
    std::vector<ZMat> colA0(nvar);
    for (int which = 0; which < 2; ++which)
        for (int r = 0; r < g; ++r)
            for (int cc = 0; cc < g; ++cc) {
                ZMat h(g, g), k(g, g);
                (which == 0 ? h : k)(r, cc) = 1;
                int v = which * g * g + r * g + cc;
                colA0[v] = zmul(zmul(prod, alpha_embed(h, k, ctx.delta(), sig)), A0);
                for (int i = 0; i < 2 * g; ++i)
                    for (int j = 0; j < 2 * g; ++j)
                        f1(i * 2 * g + j, v) = mod_reduce(colA0[v](i, j), p);
            }

    QMat e1 = qm_from_z(sig.e_rs(), ctx, 1);
    const auto& roster = gu_roster(ctx, sig);
    for (const auto& u : roster.elems()) {
        ++out.scanned;
        std::vector<i64> z(nvar);
        for (int r = 0; r < g; ++r)
            for (int c = 0; c < g; ++c) {
                z[r * g + c] = u.h(r, c);
                z[g * g + r * g + c] = u.k(r, c);
            }
        bool ok = true;
        for (int row = 0; row < f1.rows() && ok; ++row) {
            i64 acc = 0;
            for (int v = 0; v < nvar; ++v)
                if (f1(row, v) != 0) acc += f1(row, v) * z[v];
            ok = acc % p == 0;
        }
        if (!ok) continue;

        // mod p^2 refinement: k1 = u + p kappa must satisfy both the full
        // condition and the unitary identity one level up; jointly linear in
        // (kappa, dlambda)
        ZMat defect(2 * g * 2 * g, 1);
        {
            ZMat acc(2 * g, 2 * g);
            for (int v = 0; v < nvar; ++v)
                if (z[v] != 0) acc = zadd(acc, zscale(z[v], colA0[v]));
            for (int i = 0; i < 2 * g; ++i)
                for (int j = 0; j < 2 * g; ++j) {
                    i64 x = mod_reduce(acc(i, j), p2);
                    assert(x % p == 0);
                    defect(i * 2 * g + j, 0) = mod_reduce(-(x / p), p);
                }
        }
        // Hermitian defect of the integer lift: (g E conj(g)^t - lambda E)/p
        QMat gq = qm_make(u.h, u.k, ctx, 2);
        QMat e2 = qm_from_z(sig.e_rs(), ctx, 2);
        QMat herm = qm_mul(qm_mul(gq, e2, ctx, 2), qm_conj(gq, ctx, 2).transpose(), ctx, 2);
        herm = qm_sub(herm, qm_scale(ctx.qmake(u.lambda, 0, 2), e2, ctx, 2), ctx, 2);

        // unknowns: kappa (nvar) + dlambda (1); equations: 36 .. + 9 Hermitian
        int ncols = nvar + 1;
        ZMat A(4 * g * g + 9, ncols), rhs(4 * g * g + 9, 1);
        for (int v = 0; v < nvar; ++v)
            for (int i = 0; i < 2 * g; ++i)
                for (int j = 0; j < 2 * g; ++j) A(i * 2 * g + j, v) = f1(i * 2 * g + j, v);
        for (int row = 0; row < 4 * g * g; ++row) rhs(row, 0) = defect(row, 0);
        // tangency rows: kappa E conj(u)^t + u E conj(kappa)^t - dlambda E = -herm/p
        QMat ue = qm_mul(gq, e2, ctx, 2);  // used at mod-p level below
        for (int v = 0; v < nvar; ++v) {
            ZMat h(g, g), k(g, g);
            (v < g * g ? h : k)((v % (g * g)) / g, v % g) = 1;
            QMat kq = qm_make(h, k, ctx, 1);
            QMat t1 = qm_mul(qm_mul(kq, e1, ctx, 1), qm_conj(qm_reduce(gq, ctx, 1), ctx, 1).transpose(), ctx, 1);
            QMat t2 = qm_conj(t1, ctx, 1).transpose();
            QMat lin = qm_add(t1, t2, ctx, 1);
            int base = 4 * g * g;
            for (int r = 0; r < 3; ++r) A(base + r, v) = lin(r, r).re;
            int idx = base + 3;
            for (int r = 0; r < 3; ++r)
                for (int ss = r + 1; ss < 3; ++ss) {
                    A(idx++, v) = lin(r, ss).re;
                    A(idx++, v) = lin(r, ss).im;
                }
        }
        for (int r = 0; r < 3; ++r) A(4 * g * g + r, nvar) = mod_reduce(-sig.e_rs()(r, r), p);
        {
            int base = 4 * g * g;
            for (int r = 0; r < 3; ++r) {
                assert(herm(r, r).re % p == 0 && herm(r, r).im == 0);
                rhs(base + r, 0) = mod_reduce(-(herm(r, r).re / p), p);
            }
            int idx = base + 3;
            for (int r = 0; r < 3; ++r)
                for (int ss = r + 1; ss < 3; ++ss) {
                    assert(herm(r, ss).re % p == 0 && herm(r, ss).im % p == 0);
                    rhs(idx++, 0) = mod_reduce(-(herm(r, ss).re / p), p);
                    rhs(idx++, 0) = mod_reduce(-(herm(r, ss).im / p), p);
                }
        }
        (void)ue;
        if (solve_fp(A, rhs, p).has_value()) {
            out.verdict = Pi2Verdict::Feasible;
            out.witness = u;  // the k1 part of g = k1 a0
            return out;
        }
    }
    out.verdict = Pi2Verdict::Infeasible;
    return out;
}

struct Pi2Report {
    int degree{0};
    int unknown{0};
    std::vector<int> feasible_indices;  // into the full atlas enumeration
    long long scanned{0};
};

inline Pi2Report pi2_degree(const CosetRep& sigma, const FieldContext& ctx,
                            const SignatureContext& sig) {
    if (sigma.variant != Variant::tp()) throw NotOpenChart();
    Pi2Report rep;
    auto atlas = enum_sg_full3(ctx);
    for (size_t idx = 0; idx < atlas.size(); ++idx) {
        auto entry = pi2_feasible(atlas[idx], sigma, ctx, sig);
        rep.scanned += entry.scanned;
        if (entry.verdict == Pi2Verdict::Feasible) {
            ++rep.degree;
            rep.feasible_indices.push_back((int)idx);
        } else if (entry.verdict == Pi2Verdict::Unknown) {
            ++rep.unknown;
        }
    }
    return rep;
}

}  // namespace heckep
