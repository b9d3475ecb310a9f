// Coset representative atlases for the double cosets Gamma tau_p Gamma and
// Gamma tau_{p,i} Gamma: the open charts for any g, the full 8-chart atlas
// for g = 3, double coset typing from elementary divisors, and the torsion
// module W_sigma with its complex structure.

#pragma once

#include "group.hpp"

namespace heckep {

struct UnrecognizedType : ArithError {
    UnrecognizedType() : ArithError("matrix is not of T_p or T_{p,i} double coset type") {}
};
struct NotOpenChart : ArithError {
    NotOpenChart() : ArithError("operation requires an open-chart representative") {}
};

struct Variant {
    enum Kind { Tp, Tpi } kind{Tp};
    int i{-1};  // only for Tpi

    static Variant tp() { return {Tp, -1}; }
    static Variant tpi(int i) { return {Tpi, i}; }
    bool operator==(const Variant&) const = default;
};

struct CosetRep {
    ZMat mat;
    Variant variant;
    bool open{false};
    // open Tp chart: sigma(s) with s symmetric
    ZMat s;
    // full-3 Tp charts: the subset I of {1,2,3} (open chart = {1,2,3})
    std::vector<int> chart_i;
    // open Tpi chart parameters of (4.1.1)
    ZMat A, C, U;
};

// tau_p = diag(1^g, p^g); tau_{p,i} = diag(p^i, 1^{g-i}, p^i, (p^2)^{g-i})
inline CosetRep tau(int g, Variant v, const FieldContext& ctx) {
    i64 p = ctx.p();
    CosetRep r;
    r.variant = v;
    r.mat = ZMat(2 * g, 2 * g);
    if (v.kind == Variant::Tp) {
        for (int i = 0; i < g; ++i) {
            r.mat(i, i) = 1;
            r.mat(g + i, g + i) = p;
        }
    } else {
        if (v.i < 0 || v.i > g) throw DimensionMismatch();
        for (int t = 0; t < g; ++t) r.mat(t, t) = t < v.i ? p : 1;
        for (int t = 0; t < g; ++t) r.mat(g + t, g + t) = t < v.i ? p : p * p;
    }
    return r;
}

// sigma(s) = [[E, s], [0, pE]] for symmetric s with entries in {0..p-1}
inline CosetRep sigma_of_s(const ZMat& s, const FieldContext& ctx) {
    int g = s.rows();
    i64 p = ctx.p();
    CosetRep r;
    r.variant = Variant::tp();
    r.open = true;
    r.s = s;
    r.chart_i.resize(g);
    std::iota(r.chart_i.begin(), r.chart_i.end(), 1);
    r.mat = ZMat(2 * g, 2 * g);
    for (int i = 0; i < g; ++i) {
        r.mat(i, i) = 1;
        r.mat(g + i, g + i) = p;
        for (int j = 0; j < g; ++j) r.mat(i, g + j) = s(i, j);
    }
    return r;
}

// one rep per symmetric s over {0..p-1}; p^{g(g+1)/2} reps, lexicographic in
// the upper triangle read row-major
inline std::vector<CosetRep> enum_sg_open(const FieldContext& ctx, int g) {
    i64 p = ctx.p();
    int nparam = g * (g + 1) / 2;
    i64 total = 1;
    for (int i = 0; i < nparam; ++i) total *= p;
    std::vector<CosetRep> out;
    out.reserve(total);
    for (i64 code = 0; code < total; ++code) {
        ZMat s(g, g);
        i64 c = code;
        for (int i = 0; i < g; ++i)
            for (int j = i; j < g; ++j) {
                s(i, j) = s(j, i) = c % p;
                c /= p;
            }
        out.push_back(sigma_of_s(s, ctx));
    }
    return out;
}

namespace detail {

// chart shapes for g = 3 beyond the open one, transcribed case by case; each
// is [[A, B], [0, D]] with A D^t = p E and A B^t symmetric
inline void append_chart(std::vector<CosetRep>& out, const FieldContext& ctx,
                         const std::vector<int>& I, const std::function<ZMat(const std::vector<i64>&)>& shape,
                         int nparams) {
    i64 p = ctx.p();
    i64 total = 1;
    for (int i = 0; i < nparams; ++i) total *= p;
    for (i64 code = 0; code < total; ++code) {
        std::vector<i64> v(nparams);
        i64 c = code;
        for (int i = 0; i < nparams; ++i) {
            v[i] = c % p;
            c /= p;
        }
        CosetRep r;
        r.variant = Variant::tp();
        r.open = false;
        r.chart_i = I;
        r.mat = shape(v);
        out.push_back(std::move(r));
    }
}

}  // namespace detail

// the full atlas S(3): 8 charts indexed by I subset {1,2,3}, in the order
// {1,2,3}, {2,3}, {1,3}, {1,2}, {3}, {2}, {1}, {}; counts p^6, p^5, p^4,
// p^3, p^3, p^2, p, 1
inline std::vector<CosetRep> enum_sg_full3(const FieldContext& ctx) {
    i64 p = ctx.p();
    std::vector<CosetRep> out = enum_sg_open(ctx, 3);

    auto M = [](std::initializer_list<i64> rows) {
        std::vector<i64> a(rows);
        return ZMat(6, 6, std::move(a));
    };

    // I = {2,3}: params d1, d2, b11, b12, b22
    detail::append_chart(out, ctx, {2, 3},
                         [&](const std::vector<i64>& v) {
                             i64 d1 = v[0], d2 = v[1], b11 = v[2], b12 = v[3], b22 = v[4];
                             return M({p, 0, 0, 0, 0, 0,
                                       -d1, 1, 0, 0, b11, b12,
                                       -d2, 0, 1, 0, b12, b22,
                                       0, 0, 0, 1, d1, d2,
                                       0, 0, 0, 0, p, 0,
                                       0, 0, 0, 0, 0, p});
                         },
                         5);
    // I = {1,3}: params b11, b13, b33, d23
    detail::append_chart(out, ctx, {1, 3},
                         [&](const std::vector<i64>& v) {
                             i64 b11 = v[0], b13 = v[1], b33 = v[2], d23 = v[3];
                             return M({1, 0, 0, b11, 0, b13,
                                       0, p, 0, 0, 0, 0,
                                       0, -d23, 1, b13, 0, b33,
                                       0, 0, 0, p, 0, 0,
                                       0, 0, 0, 0, 1, d23,
                                       0, 0, 0, 0, 0, p});
                         },
                         4);
    // I = {1,2}: params b11, b12, b22
    detail::append_chart(out, ctx, {1, 2},
                         [&](const std::vector<i64>& v) {
                             i64 b11 = v[0], b12 = v[1], b22 = v[2];
                             return M({1, 0, 0, b11, b12, 0,
                                       0, 1, 0, b12, b22, 0,
                                       0, 0, p, 0, 0, 0,
                                       0, 0, 0, p, 0, 0,
                                       0, 0, 0, 0, p, 0,
                                       0, 0, 0, 0, 0, 1});
                         },
                         3);
    // I = {3}: params d13, d23, b33
    detail::append_chart(out, ctx, {3},
                         [&](const std::vector<i64>& v) {
                             i64 d13 = v[0], d23 = v[1], b33 = v[2];
                             return M({p, 0, 0, 0, 0, 0,
                                       0, p, 0, 0, 0, 0,
                                       -d13, -d23, 1, 0, 0, b33,
                                       0, 0, 0, 1, 0, d13,
                                       0, 0, 0, 0, 1, d23,
                                       0, 0, 0, 0, 0, p});
                         },
                         3);
    // I = {2}: params d12, b22
    detail::append_chart(out, ctx, {2},
                         [&](const std::vector<i64>& v) {
                             i64 d12 = v[0], b22 = v[1];
                             return M({p, 0, 0, 0, 0, 0,
                                       -d12, 1, 0, 0, b22, 0,
                                       0, 0, p, 0, 0, 0,
                                       0, 0, 0, 1, d12, 0,
                                       0, 0, 0, 0, p, 0,
                                       0, 0, 0, 0, 0, 1});
                         },
                         2);
    // I = {1}: param b11
    detail::append_chart(out, ctx, {1},
                         [&](const std::vector<i64>& v) {
                             i64 b11 = v[0];
                             return M({1, 0, 0, b11, 0, 0,
                                       0, p, 0, 0, 0, 0,
                                       0, 0, p, 0, 0, 0,
                                       0, 0, 0, p, 0, 0,
                                       0, 0, 0, 0, 1, 0,
                                       0, 0, 0, 0, 0, 1});
                         },
                         1);
    // I = {}: [[pE, 0], [0, E]]
    detail::append_chart(out, ctx, {},
                         [&](const std::vector<i64>&) {
                             return M({p, 0, 0, 0, 0, 0,
                                       0, p, 0, 0, 0, 0,
                                       0, 0, p, 0, 0, 0,
                                       0, 0, 0, 1, 0, 0,
                                       0, 0, 0, 0, 1, 0,
                                       0, 0, 0, 0, 0, 1});
                         },
                         0);
    return out;
}

// assemble the (4.1.1)-shape representative from its parameters; A and C are
// (g-i) x i over {0..p-1}, U is (g-i) x (g-i) over {0..p^2-1} subject to
// U - U^t = C A^t - A C^t
inline CosetRep sigma_tpi(const ZMat& A, const ZMat& C, const ZMat& U, int i, const FieldContext& ctx) {
    int gm = A.rows();  // g - i
    int g = gm + i;
    i64 p = ctx.p();
    CosetRep r;
    r.variant = Variant::tpi(i);
    r.open = true;
    r.A = A;
    r.C = C;
    r.U = U;
    r.mat = ZMat(2 * g, 2 * g);
    ZMat ct = C.transpose(), at = A.transpose();
    for (int t = 0; t < i; ++t) {
        r.mat(t, t) = p;                                             // p E_i
        for (int j = 0; j < gm; ++j) r.mat(t, g + i + j) = p * ct(t, j);  // p C^t
    }
    for (int t = 0; t < gm; ++t) {
        for (int j = 0; j < i; ++j) r.mat(i + t, j) = -A(t, j);      // -A
        r.mat(i + t, i + t) = 1;                                     // E_{g-i}
        for (int j = 0; j < i; ++j) r.mat(i + t, g + j) = C(t, j);   // C
        for (int j = 0; j < gm; ++j) r.mat(i + t, g + i + j) = U(t, j);  // U
    }
    for (int t = 0; t < i; ++t) {
        r.mat(g + t, g + t) = p;                                     // p E_i
        for (int j = 0; j < gm; ++j) r.mat(g + t, g + i + j) = p * at(t, j);  // p A^t
    }
    for (int t = 0; t < gm; ++t) r.mat(g + i + t, g + i + t) = p * p;  // p^2 E_{g-i}
    return r;
}

// open chart of S(g,i): A, C over {0..p-1}, diagonal+upper of U over
// {0..p^2-1}, lower entries of U solved from (4.1.2)
inline std::vector<CosetRep> enum_sgi_open(const FieldContext& ctx, int g, int i) {
    if (i < 1 || i > g - 1) throw DimensionMismatch();
    i64 p = ctx.p(), p2 = ctx.p2();
    int gm = g - i;
    int nac = gm * i;
    int nu = gm * (gm + 1) / 2;
    i64 total = 1;
    for (int t = 0; t < 2 * nac; ++t) total *= p;
    for (int t = 0; t < nu; ++t) total *= p2;
    std::vector<CosetRep> out;
    out.reserve(total);
    for (i64 code = 0; code < total; ++code) {
        i64 c = code;
        ZMat A(gm, i), C(gm, i), U(gm, gm);
        for (int t = 0; t < gm; ++t)
            for (int j = 0; j < i; ++j) {
                A(t, j) = c % p;
                c /= p;
            }
        for (int t = 0; t < gm; ++t)
            for (int j = 0; j < i; ++j) {
                C(t, j) = c % p;
                c /= p;
            }
        for (int t = 0; t < gm; ++t)
            for (int j = t; j < gm; ++j) {
                U(t, j) = c % p2;
                c /= p2;
            }
        // lower entries solved exactly over Z so that sigma lies in GSp on the nose
        ZMat comm = zsub(zmul(C, A.transpose()), zmul(A, C.transpose()));  // = U - U^t
        for (int t = 0; t < gm; ++t)
            for (int j = 0; j < t; ++j) U(t, j) = U(j, t) + comm(t, j);
        out.push_back(sigma_tpi(A, C, U, i, ctx));
    }
    return out;
}

// classify an integral similitude matrix by the p-part of its elementary
// divisors: (1^g, p^g) -> Tp, (1^{g-i}, p^{2i}, (p^2)^{g-i}) -> Tpi(i)
inline Variant double_coset_type(const ZMat& m, const FieldContext& ctx) {
    int n = m.rows();
    if (n != m.cols() || n % 2 != 0) throw DimensionMismatch();
    int g = n / 2;
    i128 det = zdet_exact(m);
    if (det == 0) throw UnrecognizedType();
    i128 ad = det < 0 ? -det : det;
    int v = 0;
    while (ad % ctx.p() == 0) {
        ad /= ctx.p();
        ++v;
    }
    if (ad != 1) throw UnrecognizedType();  // det must be +- a p-power
    int a = rank_fp(m, ctx.p());            // number of unit divisors
    if (v == g && a == g) return Variant::tp();
    // Tpi(i): a = g - i, divisor valuations sum v = 2g
    if (v == 2 * g && a >= 0 && a <= g) {
        int i = g - a;
        // check the middle block is p, not p^2: rank over p^2 data via smith
        auto div = smith_p_divisors(m, ctx.p());
        std::vector<int> want;
        for (int t = 0; t < g - i; ++t) want.push_back(0);
        for (int t = 0; t < 2 * i; ++t) want.push_back(1);
        for (int t = 0; t < g - i; ++t) want.push_back(2);
        if (div == want) return Variant::tpi(i);
    }
    throw UnrecognizedType();
}

// torsion module W_sigma = (row lattice of sigma + p^k Z^2g) / p^k
struct TorsionModule {
    ZMat gens;  // Howell-canonical generators in (Z/p^k)^{2g}
    int d1{0};  // rank of the free part (= dim W/W_p over Z/p^2; = dim for k=1)
    int d2{0};  // dim of the p-torsion subgroup
};

inline TorsionModule module_of_rows(const ZMat& rows, const FieldContext& ctx, int k) {
    TorsionModule w;
    w.gens = howell_form(rows, ctx.p(), k);
    if (k == 1) {
        w.d1 = w.d2 = w.gens.rows();
        return w;
    }
    int a = 0, b = 0;
    for (int r = 0; r < w.gens.rows(); ++r) {
        i64 lead = 0;
        for (int j = 0; j < w.gens.cols() && lead == 0; ++j) lead = w.gens(r, j);
        if (lead % ctx.p() != 0)
            ++a;
        else
            ++b;
    }
    w.d1 = a;
    w.d2 = a + b;
    return w;
}

inline TorsionModule w_subspace(const CosetRep& sigma, const FieldContext& ctx, int k) {
    return module_of_rows(sigma.mat, ctx, k);
}

// right-multiplication matrix of the complex structure sqrt(-Delta) on row
// vectors (x|y) in the basis {e_i, sqrt(-Delta) e_i}: (x|y) -> (-Delta y E_rs | x E_rs)
inline ZMat complex_structure(const FieldContext& ctx, const SignatureContext& sig) {
    int g = sig.g;
    ZMat j(2 * g, 2 * g);
    ZMat e = sig.e_rs();
    for (int a = 0; a < g; ++a)
        for (int b = 0; b < g; ++b) {
            j(a, g + b) = e(a, b);                 // x E_rs lands in second block
            j(g + a, b) = -ctx.delta() * e(a, b);  // -Delta y E_rs in first block
        }
    return j;
}

// action of c = a + b sqrt(-Delta) on row vectors / bases, mod p^k
inline ZMat complex_action(const ZMat& basis, Quad c, const FieldContext& ctx,
                           const SignatureContext& sig, int k) {
    ZMat jc = complex_structure(ctx, sig);
    ZMat m = zadd(zscale(c.re, zident(2 * sig.g)), zscale(c.im, jc));
    return zmod(zmul(basis, m), ctx.mod(k));
}

}  // namespace heckep
