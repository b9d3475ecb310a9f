// Cross-correspondence coincidence tests: the lattice of unitary elements
// making sigma_1 alpha(g) sigma_2^{-1} integral, per-variable valuation bound
// tables, and the determinant-valuation obstruction.

#pragma once

#include "equivalence.hpp"

namespace heckep {

struct LatticeAnalysis {
    // lower bounds for ord_p of the h and k entries over all solutions
    ZMat h_bounds, k_bounds;        // true bounds from the solution lattice
    ZMat h_immediate, k_immediate;  // bounds from entrywise propagation only
    int solution_dim_mod_p{0};      // F_p-dimension of the mod-p reduced lattice
    int det_ord_lower_bound{0};     // implied bound for ord_p det g
    int det_ord_required{0};
};

struct CoincidenceVerdict {
    VerdictStatus status{VerdictStatus::Unknown};
    std::string reason;
    LatticeAnalysis analysis;
};

namespace detail {

// columns of the symbolic linear map (h,k) -> p^mord * sigma1 alpha(g) sigma2^{-1}
// as integer matrices; variable order: h row-major then k row-major
struct CoincidenceSystem {
    std::vector<ZMat> cols;  // one 2g x 2g integer matrix per variable
    int mord{0};             // common denominator exponent: forms are cols / p^mord
    int g{0};
};

inline CoincidenceSystem coincidence_system(const CosetRep& s1, const CosetRep& s2,
                                            const FieldContext& ctx, const SignatureContext& sig) {
    CoincidenceSystem sys;
    sys.g = sig.g;
    ZMat adj = zadjugate(s2.mat);
    i128 det = zdet_exact(s2.mat);
    i64 sign = det < 0 ? -1 : 1;
    i128 ad = det * sign;
    sys.mord = ord_p_i128(ad, ctx.p());
    i64 pcheck = 1;
    for (int t = 0; t < sys.mord; ++t) pcheck *= ctx.p();
    if (ad != pcheck) throw UnrecognizedType();  // |det| must be a pure p-power
    for (int which = 0; which < 2; ++which)
        for (int r = 0; r < sig.g; ++r)
            for (int c = 0; c < sig.g; ++c) {
                ZMat h(sig.g, sig.g), k(sig.g, sig.g);
                (which == 0 ? h : k)(r, c) = 1;
                ZMat al = alpha_embed(h, k, ctx.delta(), sig);
                sys.cols.push_back(zscale(sign, zmul(zmul(s1.mat, al), adj)));
            }
    return sys;
}

// Exact decision for pairs with matching lambda-orders.  X = sigma_1 alpha(g)
// sigma_2^{-1} lies in the group GSp(Z_p), so coincidence is the lattice
// transport condition Lambda_1 alpha(g) = Lambda_2.  Since alpha commutes with
// the complex structure, the relative position of (Lambda, Lambda J_c) is
// transported; a mismatch rules out every cell at once.  Otherwise g lies in
// the unitary Cartan cell K a_m K with m <= 1 (entry bounds >= -1), the
// unimodular right factor alpha(k_2) stabilizes Lambda_2, and each cell
// reduces to a roster scan over k_1 with linear digit refinements of
//   source * alpha(k_1) * adj(target) = 0  mod p^{ord det target}.

inline std::vector<int> complex_relpos(const ZMat& mat, const FieldContext& ctx,
                                       const SignatureContext& sig) {
    ZMat num = zmul(zmul(mat, complex_structure(ctx, sig)), zadjugate(mat));
    i128 det = zdet_exact(mat);
    int dv = ord_p_i128(det < 0 ? -det : det, ctx.p());
    auto div = smith_p_divisors(num, ctx.p());
    for (auto& d : div) d -= dv;
    return div;
}

struct TransportProblem {
    ZMat source, target;  // integral bases with equal determinant p-valuation
};

// search k in GU(Z_p) with Lambda(source) alpha(k) = Lambda(target); exact:
// integrality of source alpha(k) target^{-1} plus the matching determinant
// valuation forces unimodularity.  Returns a witness mod p^digits, or nullopt
// after an exhaustive scan; sets budget_hit if a branch family overflowed.
inline std::optional<UnitaryElement> lattice_transport_witness(const TransportProblem& T,
                                                               const FieldContext& ctx,
                                                               const SignatureContext& sig,
                                                               bool& budget_hit) {
    i64 p = ctx.p();
    int g = sig.g, nvar = 2 * g * g;
    ZMat adj = zadjugate(T.target);
    i128 det = zdet_exact(T.target);
    i64 sign = det < 0 ? -1 : 1;
    int dord = ord_p_i128(det < 0 ? -det : det, ctx.p());
    {
        i128 ds = zdet_exact(T.source);
        if (ord_p_i128(ds < 0 ? -ds : ds, p) != dord) return std::nullopt;  // valuations differ
    }
    i64 pD = 1;
    for (int t = 0; t < dord; ++t) pD *= p;
    std::vector<ZMat> cols(nvar);
    int a_min = dord;
    for (int which = 0; which < 2; ++which)
        for (int r = 0; r < g; ++r)
            for (int cc = 0; cc < g; ++cc) {
                int v = which * g * g + r * g + cc;
                ZMat h(g, g), k(g, g);
                (which == 0 ? h : k)(r, cc) = 1;
                ZMat raw = zscale(sign, zmul(zmul(T.source, alpha_embed(h, k, ctx.delta(), sig)), adj));
                cols[v] = raw;
                for (i64 x : raw.data())
                    if (x != 0) a_min = std::min(a_min, ord_p_i128(x < 0 ? -x : x, p));
            }
    int digits = dord - a_min;  // k matters modulo p^digits
    if (digits <= 0) digits = 1;
    if (digits > 5) {
        budget_hit = true;
        return std::nullopt;
    }
    i64 pa = 1;
    for (int t = 0; t < a_min; ++t) pa *= p;

    auto eval36 = [&](const std::vector<i64>& z, i64 modv) {
        std::vector<i64> vals(36, 0);
        for (int v = 0; v < nvar; ++v) {
            if (z[v] == 0) continue;
            for (int e = 0; e < 36; ++e) {
                i128 acc = (i128)vals[e] + (i128)z[v] * cols[v].data()[e];
                vals[e] = (i64)(acc % (i128)modv);
            }
        }
        for (auto& x : vals) x = mod_reduce(x, modv);
        return vals;
    };
    // fixed mod-p coefficient rows of the digit systems
    ZMat digitA(36, nvar);
    for (int v = 0; v < nvar; ++v)
        for (int e = 0; e < 36; ++e) digitA(e, v) = mod_reduce(cols[v].data()[e] / pa, p);

    ZMat e_rs = sig.e_rs();
    auto herm9 = [&](const std::vector<i64>& z, i64 lambda, i64 modv) {
        std::array<i64, 9> c{};
        for (int r = 0; r < g; ++r)
            for (int cc = r; cc < g; ++cc) {
                i128 re = 0, im = 0;
                for (int t = 0; t < g; ++t) {
                    i64 eps = e_rs(t, t);
                    re += (i128)eps * ((i128)z[r * g + t] * z[cc * g + t] +
                                       (i128)ctx.delta() * z[g * g + r * g + t] * z[g * g + cc * g + t]);
                    im += (i128)eps * ((i128)z[g * g + r * g + t] * z[cc * g + t] -
                                       (i128)z[r * g + t] * z[g * g + cc * g + t]);
                }
                if (r == cc) c[r] = mod_reduce((i64)(re % modv) - lambda * e_rs(r, r), modv);
                else {
                    int idx = 3 + 2 * ((r == 0 ? cc - 1 : r + cc - 1));
                    c[idx] = mod_reduce((i64)(re % modv), modv);
                    c[idx + 1] = mod_reduce((i64)(im % modv), modv);
                }
            }
        return c;
    };
    auto herm_lin = [&](const std::vector<i64>& zbar, ZMat& A, int row0) {
        QMat e1 = qm_from_z(e_rs, ctx, 1);
        ZMat kh(g, g), kk(g, g);
        for (int r = 0; r < g; ++r)
            for (int c = 0; c < g; ++c) {
                kh(r, c) = mod_reduce(zbar[r * g + c], p);
                kk(r, c) = mod_reduce(zbar[g * g + r * g + c], p);
            }
        QMat gq = qm_make(kh, kk, ctx, 1);
        for (int v = 0; v < nvar; ++v) {
            ZMat h(g, g), k(g, g);
            (v < g * g ? h : k)((v % (g * g)) / g, v % g) = 1;
            QMat kq = qm_make(h, k, ctx, 1);
            QMat t1 = qm_mul(qm_mul(kq, e1, ctx, 1), qm_conj(gq, ctx, 1).transpose(), ctx, 1);
            QMat lin = qm_add(t1, qm_conj(t1, ctx, 1).transpose(), ctx, 1);
            for (int r = 0; r < 3; ++r) A(row0 + r, v) = lin(r, r).re;
            int idx = row0 + 3;
            for (int r = 0; r < 3; ++r)
                for (int ss = r + 1; ss < 3; ++ss) {
                    A(idx++, v) = lin(r, ss).re;
                    A(idx++, v) = lin(r, ss).im;
                }
        }
    };

    const auto& roster = gu_roster(ctx, sig);
    // refine digit d (1-based): prefix z mod p^d with transport slices below
    // a_min + d satisfied and the unitary identity mod p^d with scalar lambda
    std::function<bool(std::vector<i64>&, i64, int)> refine = [&](std::vector<i64>& z, i64 lambda,
                                                                  int d) -> bool {
        if (d >= digits) return true;
        i64 pd = 1;
        for (int t = 0; t < d; ++t) pd *= p;
        i64 slice = pa * pd;  // conditions now read at level p^{a_min + d}
        auto vals = eval36(z, slice * p);
        ZMat A(36 + 9, nvar + 1), rhs(36 + 9, 1);
        for (int e = 0; e < 36; ++e) {
            if (vals[(size_t)e] % slice != 0) return false;
            rhs(e, 0) = mod_reduce(-(vals[(size_t)e] / slice), p);
            for (int v = 0; v < nvar; ++v) A(e, v) = digitA(e, v);
        }
        herm_lin(z, A, 36);
        for (int r = 0; r < 3; ++r) A(36 + r, nvar) = mod_reduce(-e_rs(r, r), p);
        auto hc = herm9(z, lambda, pd * p);
        for (int r = 0; r < 9; ++r) {
            if (hc[(size_t)r] % pd != 0) return false;
            rhs(36 + r, 0) = mod_reduce(-(hc[(size_t)r] / pd), p);
        }
        auto part = solve_fp(A, rhs, p);
        if (!part.has_value()) return false;
        ZMat hom = kernel_fp(A, p);
        i64 count = 1;
        for (int t = 0; t < hom.rows(); ++t) {
            count *= p;
            if (count > 60000) {
                budget_hit = true;
                return false;
            }
        }
        std::vector<i64> combo(hom.rows(), 0);
        while (true) {
            ZMat sol = *part;
            for (int t = 0; t < hom.rows(); ++t)
                if (combo[t] != 0)
                    for (int cidx = 0; cidx < nvar + 1; ++cidx)
                        sol(cidx, 0) = mod_reduce(sol(cidx, 0) + combo[t] * hom(t, cidx), p);
            std::vector<i64> z2 = z;
            for (int v = 0; v < nvar; ++v) z2[v] += pd * sol(v, 0);
            i64 lambda2 = lambda + pd * sol(nvar, 0);
            if (refine(z2, lambda2, d + 1)) {
                z = z2;
                return true;
            }
            int t = 0;
            while (t < (int)combo.size() && ++combo[t] == p) combo[t++] = 0;
            if (combo.empty() || t == (int)combo.size()) break;
        }
        return false;
    };

    for (const auto& u : roster.elems()) {
        std::vector<i64> z(nvar);
        for (int r = 0; r < g; ++r)
            for (int c = 0; c < g; ++c) {
                z[r * g + c] = u.h(r, c);
                z[g * g + r * g + c] = u.k(r, c);
            }
        auto vals = eval36(z, pa * p);
        bool ok = std::all_of(vals.begin(), vals.end(), [](i64 x) { return x == 0; });
        if (!ok) continue;
        std::vector<i64> zz = z;
        if (refine(zz, u.lambda, 1)) {
            UnitaryElement w = u;
            return w;
        }
    }
    return std::nullopt;
}

// the fixed m = 1 cell representative with lambda = 1 and p a_0 of divisor
// type (1, p, p^2); p * a_0 = 1/2 [[1+p^2, 0, 1-p^2], [0, 2p, 0],
// [1-p^2, 0, 1+p^2]] in the diag(1,1,-1) convention
inline ZMat cell_rep_times_p_coin(i64 p) {
    ZMat m(3, 3);
    i64 a = (1 + p * p) / 2, b = (1 - p * p) / 2;
    m(0, 0) = a;
    m(0, 2) = b;
    m(1, 1) = p;
    m(2, 0) = b;
    m(2, 2) = a;
    return m;
}

inline std::pair<VerdictStatus, std::string> coincidence_decide_cells(const CosetRep& s1,
                                                                      const CosetRep& s2,
                                                                      const FieldContext& ctx,
                                                                      const SignatureContext& sig) {
    if (complex_relpos(s1.mat, ctx, sig) != complex_relpos(s2.mat, ctx, sig))
        return {VerdictStatus::Inequivalent, "complex-structure relative positions differ"};
    bool budget_hit = false;
    // m = 0 cell: integral g
    {
        TransportProblem T{s1.mat, s2.mat};
        auto w = lattice_transport_witness(T, ctx, sig, budget_hit);
        if (w) return {VerdictStatus::Equivalent, "integral-cell transport witness"};
    }
    // m = 1 cell: g = k1 a0 k2 with alpha(k2) absorbed into Lambda_2
    {
        ZMat pa0 = cell_rep_times_p_coin(ctx.p());
        // p * alpha(a0^{-1}): the inverse has the same closed form with the
        // off-diagonal sign flipped
        ZMat pa0inv = pa0;
        pa0inv(0, 2) = -pa0(0, 2);
        pa0inv(2, 0) = -pa0(2, 0);
        ZMat A0inv = alpha_embed(pa0inv, ZMat(3, 3), ctx.delta(), sig);
        TransportProblem T{zscale(ctx.p(), s1.mat), zmul(s2.mat, A0inv)};
        auto w = lattice_transport_witness(T, ctx, sig, budget_hit);
        if (w) return {VerdictStatus::Equivalent, "denominator-cell transport witness"};
    }
    if (budget_hit) return {VerdictStatus::Unknown, "transport search hit a branch budget"};
    return {VerdictStatus::Inequivalent, "both unitary cells exhausted"};
}

}  // namespace detail

// analyse integrality of sigma_1 alpha(g) sigma_2^{-1} over unitary g; decides
// Inequivalent when the valuation bounds force ord_p det g above the value
// required by the similitude bookkeeping
inline CoincidenceVerdict coincidence_test(const CosetRep& s1, const CosetRep& s2,
                                           const FieldContext& ctx, const SignatureContext& sig) {
    CoincidenceVerdict out;
    i64 p = ctx.p();
    int g = sig.g;
    auto lam_ord = [&](const CosetRep& s) { return s.variant.kind == Variant::Tp ? 1 : 2; };
    int dord = lam_ord(s2) - lam_ord(s1);
    if ((g * dord) % 2 != 0) {
        out.status = VerdictStatus::Inequivalent;
        out.reason = "determinant valuation g*(ord lambda_2 - ord lambda_1)/2 is not an integer";
        return out;
    }
    out.analysis.det_ord_required = g * dord / 2;

    auto sys = detail::coincidence_system(s1, s2, ctx, sig);
    int nvar = 2 * g * g, nform = 4 * g * g;

    // integrality of the forms col_v / p^mord; allow denominators up to p^b
    const int b = 4;
    int K = sys.mord + b + 3;  // head room so min orders in [-b, 3] are exact
    i64 pk = 1;
    for (int t = 0; t < K; ++t) pk *= p;
    i64 pb = 1;
    for (int t = 0; t < b; ++t) pb *= p;
    // y = p^b z integral: forms become col_v y_v / p^{mord+b} in Z_p, i.e.
    // sum col_v y_v = 0 mod p^{mord+b}, solved at modulus p^K with the extra
    // precision keeping small coordinate valuations observable
    ZMat M(nform, nvar);
    i64 pslack = 1;
    for (int t = 0; t < K - sys.mord - b; ++t) pslack *= p;
    for (int v = 0; v < nvar; ++v) {
        const ZMat& cm = sys.cols[v];
        for (int r = 0; r < 2 * g; ++r)
            for (int c = 0; c < 2 * g; ++c) M(r * 2 * g + c, v) = mod_reduce(cm(r, c) * pslack, pk);
    }
    auto ker = kernel_mod_pk(M, p, K);

    auto min_ord = [&](int v) {
        int best = K;
        for (int i = 0; i < ker.gens.rows(); ++i) {
            i64 x = ker.gens(i, v);
            if (x == 0) continue;
            int e = 0;
            while (x % p == 0) {
                x /= p;
                ++e;
            }
            best = std::min(best, e);
        }
        return best;
    };
    out.analysis.h_bounds = ZMat(g, g);
    out.analysis.k_bounds = ZMat(g, g);
    for (int r = 0; r < g; ++r)
        for (int c = 0; c < g; ++c) {
            out.analysis.h_bounds(r, c) = min_ord(r * g + c) - b;
            out.analysis.k_bounds(r, c) = min_ord(g * g + r * g + c) - b;
        }
    {
        // mod-p dimension of the integral solutions: solve the system on
        // integral (h,k) directly at modulus p^mord and reduce the generators
        ZMat M0(nform, nvar);
        i64 pm = 1;
        for (int t = 0; t < sys.mord; ++t) pm *= p;
        for (int v = 0; v < nvar; ++v)
            for (int r = 0; r < 2 * g; ++r)
                for (int c = 0; c < 2 * g; ++c)
                    M0(r * 2 * g + c, v) = mod_reduce(sys.cols[v](r, c), pm);
        auto ik = kernel_mod_pk(M0, p, sys.mord);
        out.analysis.solution_dim_mod_p = rank_fp(zmod(ik.gens, p), p);
    }

    // entrywise propagation bounds ("immediate" reading of the table)
    {
        std::vector<int> bound(nvar, -b);
        std::vector<std::vector<int>> cord(nform, std::vector<int>(nvar, INT32_MAX));
        for (int v = 0; v < nvar; ++v) {
            const ZMat& cm = sys.cols[v];
            for (int r = 0; r < 2 * g; ++r)
                for (int c = 0; c < 2 * g; ++c) {
                    i64 x = cm(r, c);
                    if (x == 0) continue;
                    int e = 0;
                    while (x % p == 0) {
                        x /= p;
                        ++e;
                    }
                    cord[r * 2 * g + c][v] = e - sys.mord;
                }
        }
        bool changed = true;
        while (changed) {
            changed = false;
            for (int f = 0; f < nform; ++f)
                for (int v = 0; v < nvar; ++v) {
                    if (cord[f][v] == INT32_MAX) continue;
                    int others = 0;  // forms must land in Z_p
                    for (int w = 0; w < nvar; ++w) {
                        if (w == v || cord[f][w] == INT32_MAX) continue;
                        others = std::min(others, cord[f][w] + bound[w]);
                    }
                    int nb = others - cord[f][v];
                    if (nb > bound[v] && nb <= 4) {
                        bound[v] = nb;
                        changed = true;
                    }
                }
        }
        out.analysis.h_immediate = ZMat(g, g);
        out.analysis.k_immediate = ZMat(g, g);
        for (int r = 0; r < g; ++r)
            for (int c = 0; c < g; ++c) {
                out.analysis.h_immediate(r, c) = bound[r * g + c];
                out.analysis.k_immediate(r, c) = bound[g * g + r * g + c];
            }
    }

    // determinant bound: best permutation sum of entry bounds
    {
        std::vector<int> perm(g);
        std::iota(perm.begin(), perm.end(), 0);
        int best = INT32_MAX;
        do {
            int s = 0;
            for (int i = 0; i < g; ++i)
                s += (int)std::min(out.analysis.h_bounds(i, perm[i]), out.analysis.k_bounds(i, perm[i]));
            best = std::min(best, s);
        } while (std::next_permutation(perm.begin(), perm.end()));
        out.analysis.det_ord_lower_bound = best;
    }

    if (out.analysis.det_ord_lower_bound > out.analysis.det_ord_required) {
        out.status = VerdictStatus::Inequivalent;
        out.reason = "valuation bounds force ord_p det g above the required value";
        return out;
    }

    // ---- full decision for equal lambda-orders (both variants T_{p,i}) ----
    // X = sigma_1 alpha(g) sigma_2^{-1} must lie in the group GSp(Z_p), so g
    // splits over the unitary Cartan cells; entry bounds >= -1 confine it to
    // the integral cell (decided against the roster) and the m = 1 cell
    // (branches explored through staged lattice/Hermitian towers; they either
    // die, certify, or exhaust the depth budget)
    if (dord == 0 && g == 3) {
        bool bounds_ge_m1 = true;
        for (int r = 0; r < g; ++r)
            for (int c = 0; c < g; ++c)
                bounds_ge_m1 &= out.analysis.h_bounds(r, c) >= -1 && out.analysis.k_bounds(r, c) >= -1;
        if (bounds_ge_m1) {
            auto res = detail::coincidence_decide_cells(s1, s2, ctx, sig);
            out.status = res.first;
            out.reason = res.second;
            return out;
        }
    }
    out.status = VerdictStatus::Unknown;
    out.reason = "no obstruction found at the valuation level";
    return out;
}

}  // namespace heckep
