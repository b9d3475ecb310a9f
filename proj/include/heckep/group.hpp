// Membership tests and enumeration for the symplectic and unitary similitude
// groups: GSp_2g over Z and Z/p^k, GU(r,s) over F_p with its embedding into
// GSp_2g, and lifting of unitary elements from F_p to Z/p^2.

#pragma once

#include <map>
#include <memory>
#include <mutex>

#include "matrix.hpp"

namespace heckep {

struct NotUnitary : ArithError {
    NotUnitary() : ArithError("element fails the unitary similitude identities") {}
};
struct LiftFailed : ArithError {
    LiftFailed() : ArithError("mod p^2 lift verification failed") {}
};
struct BudgetExceeded : ArithError {
    explicit BudgetExceeded(const std::string& what) : ArithError("budget exceeded: " + what) {}
};

// genus and signature (r,s) with r+s = g; E_rs = diag(1^r, (-1)^s)
struct SignatureContext {
    int g{0}, r{0}, s{0};

    SignatureContext(int g_, int r_, int s_) : g(g_), r(r_), s(s_) {
        if (r + s != g || r < 0 || s < 0) throw DimensionMismatch();
    }
    i64 eps(int i) const { return i < r ? 1 : -1; }
    ZMat e_rs() const {
        ZMat e(g, g);
        for (int i = 0; i < g; ++i) e(i, i) = eps(i);
        return e;
    }
};

// J = [[0, E_g], [-E_g, 0]]
inline ZMat symplectic_j(int g) {
    ZMat j(2 * g, 2 * g);
    for (int i = 0; i < g; ++i) {
        j(i, g + i) = 1;
        j(g + i, i) = -1;
    }
    return j;
}

// exact check over Z: m J m^t = lambda J; returns lambda if it holds
inline std::optional<i64> gsp_check(const ZMat& m) {
    int n = m.rows();
    if (n != m.cols() || n % 2 != 0) throw DimensionMismatch();
    int g = n / 2;
    ZMat mj = zmul(zmul(m, symplectic_j(g)), m.transpose());
    i64 lambda = mj(0, g);
    ZMat want = zscale(lambda, symplectic_j(g));
    if (mj == want) return lambda;
    return std::nullopt;
}

inline std::optional<i64> gsp_check_mod(const ZMat& m, i64 modulus) {
    int n = m.rows();
    if (n != m.cols() || n % 2 != 0) throw DimensionMismatch();
    int g = n / 2;
    ZMat mj = zmod(zmul(zmod(zmul(zmod(m, modulus), symplectic_j(g)), modulus), m.transpose()), modulus);
    i64 lambda = mj(0, g);
    ZMat want = zmod(zscale(lambda, symplectic_j(g)), modulus);
    if (mj == want) return lambda;
    return std::nullopt;
}

// g = h + k sqrt(-Delta) with g E_rs conj(g)^t = lambda E_rs, entries mod p^kprec
struct UnitaryElement {
    ZMat h, k;
    i64 lambda{0};
    int kprec{1};
};

inline QMat unitary_qmat(const UnitaryElement& u, const FieldContext& ctx) {
    return qm_make(u.h, u.k, ctx, u.kprec);
}

// returns lambda when (3.1.2) and (3.1.3) hold, i.e. when g E conj(g)^t is a
// real scalar multiple of E at precision p^kprec
inline std::optional<i64> gu_check(const ZMat& h, const ZMat& k, const FieldContext& ctx,
                                   const SignatureContext& sig, int kprec) {
    if (h.rows() != sig.g || h.cols() != sig.g || k.rows() != sig.g || k.cols() != sig.g)
        throw DimensionMismatch();
    QMat g = qm_make(h, k, ctx, kprec);
    QMat e = qm_from_z(sig.e_rs(), ctx, kprec);
    QMat m = qm_mul(qm_mul(g, e, ctx, kprec), qm_conj(g, ctx, kprec).transpose(), ctx, kprec);
    if (!qm_is_real(m)) return std::nullopt;
    i64 lambda = mod_reduce(m(0, 0).re * sig.eps(0), ctx.mod(kprec));
    ZMat want = zmod(zscale(lambda, sig.e_rs()), ctx.mod(kprec));
    if (qm_re(m) == want) return lambda;
    return std::nullopt;
}

inline std::optional<i64> gu_check(const UnitaryElement& u, const FieldContext& ctx,
                                   const SignatureContext& sig) {
    return gu_check(u.h, u.k, ctx, sig, u.kprec);
}

// alpha(g) = [[h, k E], [-Delta E k, E h E]]; exact integer block assembly
inline ZMat alpha_embed(const ZMat& h, const ZMat& k, i64 delta, const SignatureContext& sig) {
    int g = sig.g;
    ZMat e = sig.e_rs();
    ZMat ke = zmul(k, e);
    ZMat dek = zscale(-delta, zmul(e, k));
    ZMat ehe = zmul(zmul(e, h), e);
    ZMat a(2 * g, 2 * g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            a(i, j) = h(i, j);
            a(i, g + j) = ke(i, j);
            a(g + i, j) = dek(i, j);
            a(g + i, g + j) = ehe(i, j);
        }
    return a;
}

inline ZMat alpha_embed(const UnitaryElement& u, const FieldContext& ctx, const SignatureContext& sig) {
    if (!gu_check(u, ctx, sig)) throw NotUnitary();
    return alpha_embed(u.h, u.k, ctx.delta(), sig);
}

// ------------------------------------------------------------- enumeration

// every element of GU(r,s)(F_p), deterministic order: sorted lexicographically
// by (h entries row-major, then k entries row-major)
class GuRoster {
public:
    GuRoster(const FieldContext& ctx, const SignatureContext& sig, i64 max_order = 2'000'000)
        : ctx_(ctx), sig_(sig) {
        if (expected_order(ctx.p(), sig.g) > max_order)
            throw BudgetExceeded("GU roster order " + std::to_string(expected_order(ctx.p(), sig.g)));
        enumerate();
        std::sort(elems_.begin(), elems_.end(), [](const UnitaryElement& a, const UnitaryElement& b) {
            if (a.h.data() != b.h.data()) return a.h.data() < b.h.data();
            return a.k.data() < b.k.data();
        });
    }

    const std::vector<UnitaryElement>& elems() const { return elems_; }
    size_t size() const { return elems_.size(); }

    // (p-1) p^{g(g-1)/2} prod_{i=1..g} (p^i - (-1)^i)
    static i64 expected_order(i64 p, int g) {
        i64 n = p - 1;
        for (int i = 0; i < g * (g - 1) / 2; ++i) n *= p;
        i64 sign = -1;
        for (int i = 1; i <= g; ++i) {
            i64 q = 1;
            for (int t = 0; t < i; ++t) q *= p;
            n *= q - sign;
            sign = -sign;
        }
        return n;
    }

private:
    // Hermitian inner product of rows u, v: sum_t eps_t u_t conj(v_t), mod p
    Quad herm(const std::vector<Quad>& u, const std::vector<Quad>& v) const {
        Quad acc{0, 0};
        for (int t = 0; t < sig_.g; ++t) {
            Quad term = ctx_.qmul(u[t], ctx_.qconj(v[t], 1), 1);
            if (sig_.eps(t) < 0) term = ctx_.qneg(term, 1);
            acc = ctx_.qadd(acc, term, 1);
        }
        return acc;
    }

    void enumerate() {
        int g = sig_.g;
        i64 p = ctx_.p();
        i64 pg = 1;
        for (int i = 0; i < g; ++i) pg *= p * p;  // candidates per row
        std::vector<std::vector<Quad>> rows(g, std::vector<Quad>(g));
        std::vector<Quad> cand(g);
        i64 lambda = 0;

        std::function<void(int)> rec = [&](int i) {
            for (i64 code = 0; code < pg; ++code) {
                i64 c = code;
                for (int t = 0; t < g; ++t) {
                    cand[t] = Quad{c % p, (c / p) % p};
                    c /= p * p;
                }
                Quad nrm = herm(cand, cand);
                assert(nrm.im == 0);
                if (i == 0) {
                    i64 lam = mod_reduce(nrm.re * sig_.eps(0), p);
                    if (lam == 0) continue;
                    lambda = lam;
                } else {
                    if (nrm.re != mod_reduce(lambda * sig_.eps(i), p)) continue;
                    bool ok = true;
                    for (int j = 0; j < i && ok; ++j) ok = ctx_.qis_zero(herm(cand, rows[j]));
                    if (!ok) continue;
                }
                rows[i] = cand;
                if (i == g - 1) {
                    UnitaryElement u;
                    u.h = ZMat(g, g);
                    u.k = ZMat(g, g);
                    for (int r = 0; r < g; ++r)
                        for (int t = 0; t < g; ++t) {
                            u.h(r, t) = rows[r][t].re;
                            u.k(r, t) = rows[r][t].im;
                        }
                    u.lambda = lambda;
                    u.kprec = 1;
                    elems_.push_back(std::move(u));
                } else {
                    rec(i + 1);
                }
            }
        };
        rec(0);
    }

    const FieldContext& ctx_;
    const SignatureContext& sig_;
    std::vector<UnitaryElement> elems_;
};

// process-wide cache keyed by (p, delta, g, r, s)
inline const GuRoster& gu_roster(const FieldContext& ctx, const SignatureContext& sig) {
    static std::map<std::tuple<i64, i64, int, int, int>, std::unique_ptr<GuRoster>> cache;
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    auto key = std::make_tuple(ctx.p(), ctx.delta(), sig.g, sig.r, sig.s);
    auto it = cache.find(key);
    if (it == cache.end())
        it = cache.emplace(key, std::make_unique<GuRoster>(ctx, sig)).first;
    return *it->second;
}

// lift a mod-p unitary element to mod p^2 keeping lambda fixed: the defect
// M = gEconj(g)^t - lambda E is p * (Hermitian), and zeta = -1/2 M_1 (E conj(g)^t)^{-1}
// corrects it exactly one level up
inline UnitaryElement lift_gu_mod_p2(const UnitaryElement& u, const FieldContext& ctx,
                                     const SignatureContext& sig) {
    if (u.kprec != 1) throw ArithError("lift_gu_mod_p2 expects a mod-p element");
    if (!gu_check(u, ctx, sig)) throw NotUnitary();
    i64 p = ctx.p(), p2 = ctx.p2();
    QMat g2 = qm_make(u.h, u.k, ctx, 2);  // integer lift of residues
    QMat e2 = qm_from_z(sig.e_rs(), ctx, 2);
    QMat m = qm_mul(qm_mul(g2, e2, ctx, 2), qm_conj(g2, ctx, 2).transpose(), ctx, 2);
    m = qm_sub(m, qm_scale(ctx.qmake(u.lambda, 0, 2), e2, ctx, 2), ctx, 2);
    // m = p * m1 with m1 Hermitian mod p
    QMat m1(sig.g, sig.g);
    for (int i = 0; i < sig.g; ++i)
        for (int j = 0; j < sig.g; ++j) {
            assert(m(i, j).re % p == 0 && m(i, j).im % p == 0);
            m1(i, j) = ctx.qmake(m(i, j).re / p, m(i, j).im / p, 1);
        }
    QMat g1 = qm_make(u.h, u.k, ctx, 1);
    QMat egt = qm_mul(qm_from_z(sig.e_rs(), ctx, 1), qm_conj(g1, ctx, 1).transpose(), ctx, 1);
    QMat zeta = qm_scale(ctx.qmake(mod_reduce(-inv_mod(2, p), p), 0, 1),
                         qm_mul(m1, qm_inv(egt, ctx, 1), ctx, 1), ctx, 1);
    UnitaryElement lifted;
    lifted.h = ZMat(sig.g, sig.g);
    lifted.k = ZMat(sig.g, sig.g);
    for (int i = 0; i < sig.g; ++i)
        for (int j = 0; j < sig.g; ++j) {
            lifted.h(i, j) = mod_reduce(u.h(i, j) + p * zeta(i, j).re, p2);
            lifted.k(i, j) = mod_reduce(u.k(i, j) + p * zeta(i, j).im, p2);
        }
    lifted.lambda = u.lambda;
    lifted.kprec = 2;
    auto lam = gu_check(lifted, ctx, sig);
    if (!lam || *lam != u.lambda) throw LiftFailed();
    return lifted;
}

}  // namespace heckep
