// Existence-of-witness criteria: the D-equivalence oracles for both
// correspondence families, the fast theorem-based classifiers, the explicit
// special-pair witness family, self-coincidence tests and field-of-definition
// classification through determinant subgroups.

#pragma once

#include <set>

#include "tp_invariants.hpp"
#include "tpi_invariants.hpp"

namespace heckep {

struct ContextMismatch : ArithError {
    ContextMismatch() : ArithError("representatives come from different contexts") {}
};
struct BadParameters : ArithError {
    BadParameters() : ArithError("witness family parameters are inadmissible") {}
};

enum class VerdictStatus { Equivalent, Inequivalent, Unknown };

struct Verdict {
    VerdictStatus status{VerdictStatus::Unknown};
    bool proven{true};  // false when the classification leans on a conjecture
    std::optional<UnitaryElement> witness;       // mod-p unitary witness
    std::optional<ZMat> b_witness;               // B-matrix form of the witness
    i64 b_lambda{0};
    long long scanned{0};
    std::string note;
};

// ---------------------------------------------------------------- T_p oracle

namespace detail {

// check that conj(t1~) g~ t2~ is real mod p
inline bool tp_pattern_holds(const QMat& t1bar, const QMat& t2, const UnitaryElement& u,
                             const FieldContext& ctx) {
    QMat g = qm_make(u.h, u.k, ctx, 1);
    QMat m = qm_mul(qm_mul(t1bar, g, ctx, 1), t2, ctx, 1);
    return qm_is_real(m);
}

}  // namespace detail

// decides D-equivalence of two open-chart representatives: quadratic-form
// search over B in GL_g when both lie in the top part, exhaustive unitary
// search otherwise
inline Verdict tp_equiv_oracle(const CosetRep& s1, const CosetRep& s2, const FieldContext& ctx,
                               const SignatureContext& sig) {
    if (s1.variant != Variant::tp() || s2.variant != Variant::tp() || !s1.open || !s2.open)
        throw NotOpenChart();
    i64 p = ctx.p();
    Verdict v;
    auto i1 = tp_invariant(s1, ctx, sig), i2 = tp_invariant(s2, ctx, sig);
    QMat t1 = tp_t_matrix(s1.s, ctx, sig, 1), t2 = tp_t_matrix(s2.s, ctx, sig, 1);
    QMat t1bar = qm_conj(t1, ctx, 1);

    if (i1.dpart == 2 * sig.g && i2.dpart == 2 * sig.g) {
        // search B with B (E T2 E)^{-1} B^t = lambda T1 over GL_g(F_p)
        ZMat e = sig.e_rs();
        ZMat ete = zmod(zmul(zmul(e, i2.T_mat), e), p);
        ZMat etei = zinv_mod(ete, p, 1);
        ZMat T1 = zmod(i1.T_mat, p);
        int g = sig.g;
        i64 total = 1;
        for (int t = 0; t < g * g; ++t) total *= p;
        for (i64 code = 0; code < total; ++code) {
            ZMat b(g, g);
            i64 c = code;
            for (auto& x : b.data()) {
                x = c % p;
                c /= p;
            }
            ++v.scanned;
            ZMat m = zmod(zmul(zmul(b, etei), b.transpose()), p);
            // m must equal lambda T1 for a unit lambda
            i64 lambda = 0;
            bool ok = true;
            for (int r = 0; r < g && ok; ++r)
                for (int s = 0; s < g && ok; ++s) {
                    if (T1(r, s) == 0) {
                        ok = m(r, s) == 0;
                    } else if (lambda == 0) {
                        lambda = mul_mod(m(r, s), inv_mod(T1(r, s), p), p);
                        ok = lambda != 0;
                    } else {
                        ok = m(r, s) == mul_mod(lambda, T1(r, s), p);
                    }
                }
            if (!ok || lambda == 0) continue;
            if (rank_fp(b, p) != g) continue;
            // materialize the unitary witness g~ = conj(t1~)^{-1} B t2~^{-1}
            QMat bq = qm_from_z(b, ctx, 1);
            QMat gq = qm_mul(qm_mul(qm_inv(t1bar, ctx, 1), bq, ctx, 1), qm_inv(t2, ctx, 1), ctx, 1);
            UnitaryElement u{qm_re(gq), qm_im(gq), 0, 1};
            auto lam = gu_check(u, ctx, sig);
            if (!lam || *lam == 0 || !detail::tp_pattern_holds(t1bar, t2, u, ctx)) continue;
            u.lambda = *lam;
            v.status = VerdictStatus::Equivalent;
            v.witness = u;
            v.b_witness = b;
            v.b_lambda = lambda;
            v.note = "quadratic-form witness";
            return v;
        }
        v.status = VerdictStatus::Inequivalent;
        v.note = "exhaustive B-search";
        return v;
    }

    // general case: exhaustive scan of the unitary group mod p
    const auto& roster = gu_roster(ctx, sig);
    for (const auto& u : roster.elems()) {
        ++v.scanned;
        if (detail::tp_pattern_holds(t1bar, t2, u, ctx)) {
            v.status = VerdictStatus::Equivalent;
            v.witness = u;
            v.note = "unitary roster witness";
            return v;
        }
    }
    v.status = VerdictStatus::Inequivalent;
    v.note = "exhaustive unitary search";
    return v;
}

// classification by partition label and quadratic form class; no witness
inline Verdict tp_equiv_fast(const CosetRep& s1, const CosetRep& s2, const FieldContext& ctx,
                             const SignatureContext& sig) {
    auto i1 = tp_invariant(s1, ctx, sig), i2 = tp_invariant(s2, ctx, sig);
    Verdict v;
    bool fully_proven_case = sig.g == 3 && sig.r == 2 && sig.s == 1;
    if (i1.dpart != i2.dpart) {
        v.status = VerdictStatus::Inequivalent;
        // proven when one side is the top part; conjectural across middle parts
        v.proven = fully_proven_case || i1.dpart == 2 * sig.g || i2.dpart == 2 * sig.g;
        v.note = "different dimension parts";
        return v;
    }
    if (i1.dpart == 2 * sig.g) {
        bool eq = sig.g % 2 == 1 || i1.qclass == i2.qclass;
        v.status = eq ? VerdictStatus::Equivalent : VerdictStatus::Inequivalent;
        v.proven = true;
        v.note = "top part classification";
        return v;
    }
    v.status = i1.qclass == i2.qclass ? VerdictStatus::Equivalent : VerdictStatus::Inequivalent;
    v.proven = fully_proven_case;
    v.note = v.proven ? "middle part classification" : "middle part classification (conjectural)";
    return v;
}

// -------------------------------------------------------------- T_{p,i} oracles

namespace detail {

// imaginary parts vanish outside the leading i x i block
inline bool block_pattern_holds(const QMat& b, int i) {
    for (int r = 0; r < b.rows(); ++r)
        for (int c = 0; c < b.cols(); ++c) {
            if (r < i && c < i) continue;
            if (b(r, c).im != 0) return false;
        }
    return true;
}

struct TpiPatternData {
    QMat mu11, mu21;          // of sigma_1
    QMat mu12bart, mu22bart;  // conj-transposed of sigma_2's mu's, with E factors folded
    int i{0};
};

inline TpiPatternData tpi_pattern_data(const CosetRep& s1, const CosetRep& s2,
                                       const FieldContext& ctx) {
    TpiPatternData d;
    d.i = s1.variant.i;
    SignatureContext sig = tpi_signature(s1.A.rows() + d.i, d.i);
    QMat e = qm_from_z(sig.e_rs(), ctx, 1);
    auto [m11, m21] = tpi_mu(s1, ctx, 1);
    auto [m12, m22] = tpi_mu(s2, ctx, 1);
    d.mu11 = m11;
    d.mu21 = m21;
    // B_1 = mu11 g E conj(mu12)^t ; B_2 = mu21 g E conj(mu22)^t E
    d.mu12bart = qm_mul(e, qm_conj(m12, ctx, 1).transpose(), ctx, 1);
    d.mu22bart = qm_mul(qm_mul(e, qm_conj(m22, ctx, 1).transpose(), ctx, 1), e, ctx, 1);
    return d;
}

inline bool tpi_pattern_holds(const TpiPatternData& d, const UnitaryElement& u,
                              const FieldContext& ctx) {
    QMat g = qm_make(u.h, u.k, ctx, 1);
    QMat b1 = qm_mul(qm_mul(d.mu11, g, ctx, 1), d.mu12bart, ctx, 1);
    if (!block_pattern_holds(b1, d.i)) return false;
    QMat b2 = qm_mul(qm_mul(d.mu21, g, ctx, 1), d.mu22bart, ctx, 1);
    return block_pattern_holds(b2, d.i);
}

}  // namespace detail

// the weak equivalence condition: some unitary g~ makes both B-matrices real
// outside the leading block
inline Verdict tpi_weak_oracle(const CosetRep& s1, const CosetRep& s2, const FieldContext& ctx) {
    if (s1.variant.kind != Variant::Tpi || s2.variant.kind != Variant::Tpi || !s1.open || !s2.open)
        throw NotOpenChart();
    if (s1.variant.i != s2.variant.i) throw ContextMismatch();
    int g = s1.A.rows() + s1.variant.i;
    SignatureContext sig = tpi_signature(g, s1.variant.i);
    auto data = detail::tpi_pattern_data(s1, s2, ctx);
    Verdict v;
    const auto& roster = gu_roster(ctx, sig);
    for (const auto& u : roster.elems()) {
        ++v.scanned;
        if (detail::tpi_pattern_holds(data, u, ctx)) {
            v.status = VerdictStatus::Equivalent;
            v.witness = u;
            v.note = "weak block-pattern witness";
            return v;
        }
    }
    v.status = VerdictStatus::Inequivalent;
    v.note = "exhaustive unitary search against the weak pattern";
    return v;
}

// general-part classification: theorem verdict from the det G22 square class,
// with the mod-p pattern search attached as a probe/witness source
inline Verdict tpi_strong_pattern_oracle(const CosetRep& s1, const CosetRep& s2,
                                         const FieldContext& ctx) {
    auto i1 = tpi_invariant(s1, ctx), i2 = tpi_invariant(s2, ctx);
    int i = s1.variant.i, g = i1.g;
    if (i1.label != TpiLabel::Dj || i2.label != TpiLabel::Dj || i1.j != i || i2.j != i) {
        // outside the general part: fall back to the exhaustive weak search
        Verdict v = tpi_weak_oracle(s1, s2, ctx);
        v.note += " (outside the general part)";
        return v;
    }
    Verdict v;
    bool eq;
    if ((g - i) % 2 == 1) {
        eq = true;
        v.note = "general part, odd corank";
    } else {
        if (!i1.detG22_class || !i2.detG22_class) throw ClassifierDisagreement();
        eq = *i1.detG22_class == *i2.detG22_class;
        v.note = "general part, det G22 square class";
    }
    v.status = eq ? VerdictStatus::Equivalent : VerdictStatus::Inequivalent;
    if (eq) {
        Verdict search = tpi_weak_oracle(s1, s2, ctx);
        v.scanned = search.scanned;
        if (search.status == VerdictStatus::Equivalent) {
            v.witness = search.witness;
        } else {
            v.note += "; mod-p pattern search found no witness (recorded)";
        }
    }
    return v;
}

// ------------------------------------------------- explicit special witness

// the closed-form witness family linking the reference special pair for
// g = 3, i = 2 (p = 3 mod 4); parameters kpar, omega in F_p^*
inline UnitaryElement construct_witness_5331(i64 a1, i64 a2, i64 eps, i64 kpar, i64 omega,
                                             const FieldContext& ctx) {
    i64 p = ctx.p();
    auto sd = ctx.fp_sqrt(ctx.delta());
    if (!sd || *sd == 0) throw BadParameters();
    i64 r = inv_mod(*sd, p);  // i = r sqrt(-Delta) squares to -1
    if (kpar % p == 0 || omega % p == 0) throw BadParameters();
    i64 rho2 = mod_reduce(1 - (a1 - 2 * omega) * (a1 - 2 * omega), p);
    auto rho_opt = ctx.fp_sqrt(rho2);
    if (!rho_opt || *rho_opt == 0) throw BadParameters();
    i64 rho = *rho_opt;
    i64 inv2 = inv_mod(2, p);
    auto fp = [&](i64 x) { return mod_reduce(x, p); };
    // entries x + i y with i = r sqrt(-Delta): re = x, im = r y
    auto quad = [&](i64 x, i64 y) { return std::pair<i64, i64>{fp(x), fp(mul_mod(r, fp(y), p))}; };
    auto e11 = quad(omega, mul_mod(inv2, fp(eps * a2 - rho), p));
    auto e12 = quad(mul_mod(inv2, fp(a2 + eps * rho), p), fp(eps * (omega - a1)));
    auto e21 = quad(mul_mod(inv2, fp(eps * a2 + rho), p), fp(omega - a1));
    auto e22 = quad(fp(-eps * omega), mul_mod(inv2, fp(-a2 + eps * rho), p));
    ZMat h(3, 3), k(3, 3);
    auto put = [&](int rr, int cc, std::pair<i64, i64> q) {
        h(rr, cc) = mul_mod(kpar, q.first, p);
        k(rr, cc) = mul_mod(kpar, q.second, p);
    };
    put(0, 0, e11);
    put(0, 1, e12);
    put(1, 0, e21);
    put(1, 1, e22);
    h(2, 2) = mod_reduce(kpar, p);
    UnitaryElement u{h, k, 0, 1};
    SignatureContext sig = tpi_signature(3, 2);
    auto lam = gu_check(u, ctx, sig);
    if (!lam || *lam == 0) throw BadParameters();
    u.lambda = *lam;
    return u;
}

// ------------------------------------------------------- self-coincidence

enum class Coincide { Yes, No, Unknown };

struct CoincideResult {
    Coincide verdict{Coincide::Unknown};
    std::string reason;
    std::optional<std::pair<ZMat, ZMat>> witness_hk;  // mod p^2 halves of g when materialized
};

namespace detail {

// witness for the deep special family with A = C = 0 (i = 1): g is block
// diag(p c, h22 (1 + U sqrt(-Delta))) with h22 solving the scaled norm equation;
// verified at precision p^3 against both the similitude and the integrality
inline std::optional<std::pair<ZMat, ZMat>> materialize_deep_witness(const CosetRep& sigma,
                                                                     const FieldContext& ctx) {
    i64 p = ctx.p(), p2 = ctx.p2(), p3 = p * p * p;
    const ZMat& U = sigma.U;
    // S = (1 + Delta U^2) / p^2 must be integral for the deep family
    ZMat s_num = zadd(zident(2), zscale(ctx.delta(), zmul(U, U)));
    for (auto x : s_num.data())
        if (x % p2 != 0) return std::nullopt;
    // search h22 mod p^3 with h22 S h22^t = u E_2 mod p, u a unit, then refine:
    // the full check below is done on exact integer lifts mod p^3
    for (i64 code = 0; code < p3 * p3 * p3 * p3; ++code) {
        ZMat h22(2, 2);
        i64 c = code;
        for (auto& x : h22.data()) {
            x = c % p3;
            c /= p3;
        }
        // g22 = h22 (1 + U sqrt(-Delta)); g11 = p * c0 with c0 chosen after u is known
        // lambda condition: g E g~^t = p^2 u E with E = diag(1, -1, -1)
        ZMat re22 = h22;
        ZMat im22 = zmul(h22, U);
        // block (2,2) of g E conj(g)^t = -(g22 g22bar^t) = -(h22 (1 + Delta U^2) h22^t)
        ZMat q = zmul(zmul(h22, s_num), h22.transpose());  // = p^2 h22 S h22^t
        // require q = p^2 u E_2 mod p^3
        if (q(0, 1) % p3 != 0 || q(1, 0) % p3 != 0) continue;
        if (mod_reduce(q(0, 0) - q(1, 1), p3) != 0) continue;
        i64 u = mod_reduce(q(0, 0) / p2, p);
        if (u == 0) continue;
        // block (1,1): (p c0)(p c0bar) = p^2 N(c0) = p^2 u => N(c0) = u
        i64 c0re = -1, c0im = -1;
        for (i64 a = 0; a < p && c0re < 0; ++a)
            for (i64 b = 0; b < p; ++b)
                if (mod_reduce(a * a + ctx.delta() * b * b - u, p) == 0 && (a != 0 || b != 0)) {
                    c0re = a;
                    c0im = b;
                    break;
                }
        if (c0re < 0) continue;
        ZMat h(3, 3), k(3, 3);
        h(0, 0) = mod_reduce(p * c0re, p3);
        k(0, 0) = mod_reduce(p * c0im, p3);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b) {
                h(1 + a, 1 + b) = mod_reduce(re22(a, b), p3);
                k(1 + a, 1 + b) = mod_reduce(im22(a, b), p3);
            }
        // integrality: alpha(g) adj(sigma) = 0 mod p^6 decides alpha(g) sigma^{-1}
        // integral; the mod-p^3 knowledge of g suffices since adj has order >= 4
        SignatureContext sig = tpi_signature(3, 1);
        ZMat al = alpha_embed(h, k, ctx.delta(), sig);
        ZMat adj = zadjugate(sigma.mat);
        i128 det = zdet_exact(sigma.mat);
        ZMat prod = zmul(al, adj);
        i64 p6 = p3 * p3 * (i64)1;
        bool integral = true;
        for (auto x : prod.data()) integral &= mod_reduce(x, p6) == 0;
        (void)det;
        if (!integral) continue;
        return std::make_pair(h, k);
    }
    return std::nullopt;
}

}  // namespace detail

inline CoincideResult self_coincide(const CosetRep& sigma, const FieldContext& ctx,
                                    const SignatureContext& sig) {
    CoincideResult res;
    if (sigma.variant == Variant::tp()) {
        if (sig.g % 2 == 1) {
            res.verdict = Coincide::No;
            res.reason = "norm parity: N(det g) = p^g has odd order at an inert prime";
            return res;
        }
        auto inv = tp_invariant(sigma, ctx, sig);
        res.verdict = inv.dpart == sig.g ? Coincide::Yes : Coincide::No;
        res.reason = "trivial-part classification (even genus)";
        return res;
    }
    if (sigma.variant.kind == Variant::Tpi && sigma.variant.i == 1) {
        auto inv = tpi_invariant(sigma, ctx);
        if (inv.g != 3) {
            res.reason = "only genus 3 is classified";
            return res;
        }
        if (inv.label != TpiLabel::DStar) {
            res.verdict = Coincide::No;
            res.reason = "outside the special set";
            return res;
        }
        auto kind = dstar_split(sigma, inv, ctx);
        if (kind == DStarKind::D1star) {
            res.verdict = Coincide::No;
            res.reason = "shallow special class";
            return res;
        }
        res.verdict = Coincide::Yes;
        bool ac_zero = true;
        for (auto x : sigma.A.data()) ac_zero &= mod_reduce(x, ctx.p()) == 0;
        for (auto x : sigma.C.data()) ac_zero &= mod_reduce(x, ctx.p()) == 0;
        if (ac_zero) {
            res.witness_hk = detail::materialize_deep_witness(sigma, ctx);
            res.reason = res.witness_hk ? "deep special class; explicit witness verified"
                                        : "deep special class (witness search failed)";
        } else {
            res.reason = "deep special class (classifier only; witness family needs A = C = 0)";
        }
        return res;
    }
    if (sigma.variant.kind == Variant::Tpi && sigma.variant.i == 0) {
        // the analysis applies to sigma(s) shapes [[E, s], [0, p^2 E]] whose T
        // matrix is unit * diag(1, 0, 0) mod p^4: then h T = 0 mod p^2 forces
        // the first column of h away, and the residual quadratic condition has
        // rank at most 2 against a required rank of 3
        i64 p = ctx.p();
        i64 p4 = p * p * p * p;
        int g = sigma.mat.rows() / 2;
        ZMat s(g, g);
        bool shape = true;
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) {
                shape &= sigma.mat(i, j) == (i == j ? 1 : 0);
                shape &= sigma.mat(g + i, g + j) == (i == j ? p * p : 0);
                shape &= sigma.mat(g + i, j) == 0;
                s(i, j) = sigma.mat(i, g + j);
            }
        if (!shape || g != 3) {
            res.reason = "analysis implemented for the rank-one T(p,0) family only";
            return res;
        }
        ZMat T = zmod(zadd(sig.e_rs(), zscale(ctx.delta(), zmul(zmul(s, sig.e_rs()), s))), p4);
        ZMat want(3, 3);
        want(0, 0) = T(0, 0);
        if (T != want || T(0, 0) % p == 0) {
            res.reason = "T matrix is not unit * diag(1,0,0) mod p^4";
            return res;
        }
        res.verdict = Coincide::No;
        res.reason = "rank bound: the residual form h'(a E W + W E a)h'^t has rank <= 2 < 3";
        return res;
    }
    res.reason = "variant not classified";
    return res;
}

// ------------------------------------------------ field of definition class

enum class FieldClass { ContainedInFpStar, FullGroup, ProperSubgroup };

struct FieldClassResult {
    FieldClass cls;
    i64 subgroup_order{0};
    i64 index{0};  // of the determinant subgroup inside F_p^2^*
};

// collect determinants of the unitary elements whose self-pattern matches the
// stabilizer condition for sigma, and classify the subgroup they generate
inline FieldClassResult field_class(const CosetRep& sigma, const FieldContext& ctx,
                                    const SignatureContext& sig) {
    i64 p = ctx.p();
    std::set<std::pair<i64, i64>> dets;
    if (sigma.variant == Variant::tp()) {
        if (!sigma.open) throw NotOpenChart();
        QMat t = tp_t_matrix(sigma.s, ctx, sig, 1);
        QMat tbar = qm_conj(t, ctx, 1);
        QMat e = qm_from_z(sig.e_rs(), ctx, 1);
        const auto& roster = gu_roster(ctx, sig);
        for (const auto& u : roster.elems()) {
            QMat g = qm_make(u.h, u.k, ctx, 1);
            QMat m = qm_mul(qm_mul(qm_mul(tbar, e, ctx, 1), g, ctx, 1), t.transpose(), ctx, 1);
            if (!qm_is_real(m)) continue;
            Quad d = qm_det(g, ctx, 1);
            dets.insert({d.re, d.im});
        }
    } else {
        auto data = detail::tpi_pattern_data(sigma, sigma, ctx);
        SignatureContext tsig = tpi_signature(sigma.A.rows() + sigma.variant.i, sigma.variant.i);
        const auto& roster = gu_roster(ctx, tsig);
        for (const auto& u : roster.elems()) {
            if (!detail::tpi_pattern_holds(data, u, ctx)) continue;
            Quad d = qm_det(qm_make(u.h, u.k, ctx, 1), ctx, 1);
            dets.insert({d.re, d.im});
        }
    }
    // close under multiplication (the collected set is finite and small)
    std::set<std::pair<i64, i64>> sub = dets;
    bool grew = true;
    while (grew) {
        grew = false;
        std::vector<std::pair<i64, i64>> cur(sub.begin(), sub.end());
        for (const auto& a : cur)
            for (const auto& b : cur) {
                Quad q = ctx.qmul(Quad{a.first, a.second}, Quad{b.first, b.second}, 1);
                if (sub.insert({q.re, q.im}).second) grew = true;
            }
    }
    FieldClassResult out{};
    out.subgroup_order = (i64)sub.size();
    out.index = (p * p - 1) / out.subgroup_order;
    bool all_real = std::all_of(sub.begin(), sub.end(),
                                [](const std::pair<i64, i64>& q) { return q.second == 0; });
    if (all_real)
        out.cls = FieldClass::ContainedInFpStar;
    else if (out.subgroup_order == p * p - 1)
        out.cls = FieldClass::FullGroup;
    else
        out.cls = FieldClass::ProperSubgroup;
    return out;
}

}  // namespace heckep
