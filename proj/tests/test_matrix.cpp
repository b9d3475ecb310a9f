#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "test_support.hpp"

using namespace heckep;

TEST_CASE("exact determinant, rank, adjugate") {
    FieldContext c(3, 1);
    CHECK(zdet_exact(zident(3)) == 1);
    ZMat d(3, 3);
    d(0, 0) = 1;
    CHECK(rank_fp(d, 3) == 1);

    auto g = testsup::rng(7);
    for (int t = 0; t < 50; ++t) {
        ZMat a(4, 4);
        for (auto& x : a.data()) x = testsup::rnd_mod(g, 19) - 9;
        ZMat adj = zadjugate(a);
        i128 det = zdet_exact(a);
        ZMat prod = zmul(a, adj);
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) CHECK((i128)prod(i, j) == (i == j ? det : 0));
    }
}

TEST_CASE("det is multiplicative") {
    auto g = testsup::rng(11);
    for (int t = 0; t < 30; ++t) {
        ZMat a(3, 3), b(3, 3);
        for (auto& x : a.data()) x = testsup::rnd_mod(g, 7) - 3;
        for (auto& x : b.data()) x = testsup::rnd_mod(g, 7) - 3;
        CHECK(zdet_exact(zmul(a, b)) == zdet_exact(a) * zdet_exact(b));
    }
}

TEST_CASE("inverse over Z/p^2 by adjugate lift") {
    FieldContext c(3, 1);
    auto g = testsup::rng(13);
    int done = 0;
    while (done < 25) {
        ZMat a(3, 3);
        for (auto& x : a.data()) x = testsup::rnd_mod(g, 9);
        i128 det = zdet_exact(a);
        if (det % 3 == 0) continue;
        ZMat inv = zinv_mod(a, 3, 2);
        CHECK(zmod(zmul(inv, a), 9) == zident(3));
        CHECK(zmod(zmul(a, inv), 9) == zident(3));
        ++done;
    }
    ZMat sing = zident(3);
    sing(2, 2) = 3;
    CHECK_THROWS_AS(zinv_mod(sing, 3, 2), NonInvertible);
}

TEST_CASE("kernel over F_p") {
    ZMat a(2, 4, {1, 2, 0, 1, 0, 0, 1, 2});
    ZMat ker = kernel_fp(a, 5);
    CHECK(ker.rows() == 2);
    ZMat prod = zmod(zmul(a, ker.transpose()), 5);
    for (auto x : prod.data()) CHECK(x == 0);
}

TEST_CASE("smith p-divisors of diagonal and tau matrices") {
    FieldContext c(3, 1);
    ZMat d1(6, 6);
    for (int i = 0; i < 6; ++i) d1(i, i) = i < 3 ? 1 : 3;
    CHECK(smith_p_divisors(d1, 3) == std::vector<int>{0, 0, 0, 1, 1, 1});

    // tau_{p,1} for g=3: diag(p,1,1,p,p^2,p^2) reorders to (1,1,p,p,p^2,p^2)
    ZMat d2(6, 6);
    i64 diag[6] = {3, 1, 1, 3, 9, 9};
    for (int i = 0; i < 6; ++i) d2(i, i) = diag[i];
    CHECK(smith_p_divisors(d2, 3) == std::vector<int>{0, 0, 1, 1, 2, 2});
}

TEST_CASE("smith divisors: divisibility chain, unimodular invariance") {
    FieldContext ctx(3, 1);
    auto g = testsup::rng(17);
    for (int t = 0; t < 20; ++t) {
        // random matrix with p-power determinant: D * unimodulars
        ZMat d(4, 4);
        std::vector<int> exps = {0, (int)(g() % 2), (int)(g() % 2 + 1), (int)(g() % 2 + 1)};
        std::sort(exps.begin(), exps.end());
        for (int i = 0; i < 4; ++i) {
            d(i, i) = 1;
            for (int e = 0; e < exps[i]; ++e) d(i, i) *= 3;
        }
        ZMat u = zident(4), v = zident(4);
        for (int s = 0; s < 4; ++s) {
            ZMat e = zident(4);
            e((int)(g() % 4), (int)(g() % 4)) += 0;  // keep diag
            int i = (int)(g() % 4), j = (int)(g() % 4);
            if (i != j) e(i, j) = testsup::rnd_mod(g, 5) - 2;
            u = zmul(u, e);
            int i2 = (int)(g() % 4), j2 = (int)(g() % 4);
            ZMat e2 = zident(4);
            if (i2 != j2) e2(i2, j2) = testsup::rnd_mod(g, 5) - 2;
            v = zmul(e2, v);
        }
        ZMat m = zmul(zmul(u, d), v);
        auto div = smith_p_divisors(m, 3);
        CHECK(div == std::vector<int>{exps[0], exps[1], exps[2], exps[3]});
        for (size_t i = 1; i < div.size(); ++i) CHECK(div[i - 1] <= div[i]);
    }
}

TEST_CASE("howell form is canonical for row modules mod p^2") {
    FieldContext ctx(3, 1);
    auto g = testsup::rng(23);
    for (int t = 0; t < 40; ++t) {
        ZMat a(3, 4);
        for (auto& x : a.data()) x = testsup::rnd_mod(g, 9);
        ZMat h = howell_form(a, 3, 2);
        // unimodular left multiplication preserves the form
        ZMat u = zident(3);
        for (int s = 0; s < 3; ++s) {
            int i = (int)(g() % 3), j = (int)(g() % 3);
            if (i != j) {
                ZMat e = zident(3);
                e(i, j) = testsup::rnd_mod(g, 9);
                u = zmod(zmul(u, e), 9);
            }
        }
        CHECK(howell_form(zmul(u, a), 3, 2) == h);
        // idempotent
        CHECK(howell_form(h, 3, 2) == h);
    }
}

TEST_CASE("hermite_coset_form: orbit invariance under GSp(Z/p^2) and idempotence") {
    FieldContext ctx(3, 1);
    auto g = testsup::rng(29);
    ZMat s = testsup::rnd_symmetric(g, 3, 3);
    ZMat sigma(6, 6);
    for (int i = 0; i < 3; ++i) {
        sigma(i, i) = 1;
        sigma(3 + i, 3 + i) = 3;
        for (int j = 0; j < 3; ++j) sigma(i, 3 + j) = s(i, j);
    }
    ZMat h = hermite_coset_form(sigma, 3, 1);
    for (int t = 0; t < 20; ++t) {
        ZMat gamma = testsup::rnd_gsp(g, 3, ctx, 2);
        CHECK(hermite_coset_form(zmul(gamma, sigma), 3, 1) == h);
    }
    CHECK(hermite_coset_form(h, 3, 1) == h);
    ZMat zero(6, 6);
    CHECK_THROWS_AS(hermite_coset_form(zero, 3, 1), SingularModPk);
}

TEST_CASE("hermite_coset_form separates cosets (integrality cross-check)") {
    // two open-chart reps are left-coset-equal iff s1 = s2; sample the
    // equivalence through the direct integrality test sigma1 sigma2^{-1}
    FieldContext ctx(3, 1);
    auto mk = [&](const ZMat& s) {
        ZMat m(6, 6);
        for (int i = 0; i < 3; ++i) {
            m(i, i) = 1;
            m(3 + i, 3 + i) = 3;
            for (int j = 0; j < 3; ++j) m(i, 3 + j) = s(i, j);
        }
        return m;
    };
    auto g = testsup::rng(31);
    for (int t = 0; t < 20; ++t) {
        ZMat s1 = testsup::rnd_symmetric(g, 3, 3), s2 = testsup::rnd_symmetric(g, 3, 3);
        ZMat m1 = mk(s1), m2 = mk(s2);
        bool same_form = hermite_coset_form(m1, 3, 1) == hermite_coset_form(m2, 3, 1);
        // direct test: m1 * m2^{-1} integral with unit determinant mod p
        ZMat num = zmul(m1, zadjugate(m2));  // = m1 m2^{-1} * det(m2)
        i128 det2 = zdet_exact(m2);
        bool integral = true;
        for (auto x : num.data()) integral &= (x % (i64)det2) == 0;
        CHECK(same_form == integral);
        CHECK(same_form == (s1 == s2));
    }
}

TEST_CASE("pluecker coordinates: basics and projective invariance") {
    FieldContext ctx(3, 1);
    // (E | 0): only the first coordinate is nonzero
    ZMat b(3, 6);
    for (int i = 0; i < 3; ++i) b(i, i) = 1;
    auto v = pluecker(b, 3);
    CHECK(v.size() == 20);
    CHECK(v[0] == 1);
    for (size_t i = 1; i < v.size(); ++i) CHECK(v[i] == 0);

    auto g = testsup::rng(37);
    for (int t = 0; t < 20; ++t) {
        ZMat m(3, 6);
        for (auto& x : m.data()) x = testsup::rnd_mod(g, 3);
        if (rank_fp(m, 3) != 3) continue;
        auto v1 = pluecker(m, 3);
        // row operations leave normalized coordinates unchanged
        ZMat r = m;
        for (int j = 0; j < 6; ++j) r(0, j) = mod_reduce(2 * r(0, j) + r(1, j), 3);
        CHECK(pluecker(r, 3) == v1);
    }
    ZMat bad(3, 6);
    CHECK_THROWS_AS(pluecker(bad, 3), RankDeficient);
}

// brute-force oracle: are two symmetric matrices congruent up to scalar?
static bool congruent_up_to_scalar_2x2(const ZMat& q1, const ZMat& q2, i64 p) {
    for (i64 code = 0; code < p * p * p * p; ++code) {
        i64 c = code;
        ZMat b(2, 2);
        for (auto& x : b.data()) {
            x = c % p;
            c /= p;
        }
        if (mod_reduce((i64)(zdet_exact(b) % p), p) == 0) continue;
        ZMat t = zmod(zmul(zmul(b, q1), b.transpose()), p);
        for (i64 lam = 1; lam < p; ++lam)
            if (zmod(zscale(lam, t), p) == zmod(q2, p)) return true;
    }
    return false;
}

TEST_CASE("qform_class: rank, scalar classes, 2x2 completeness oracle") {
    FieldContext ctx(3, 1);
    ZMat z(3, 3);
    CHECK(qform_class(z, ctx, true).rank == 0);

    ZMat d1(3, 3), d2(3, 3);
    for (int i = 0; i < 3; ++i) {
        d1(i, i) = 1;
        d2(i, i) = 2;
    }
    auto c1 = qform_class(d1, ctx, true), c2 = qform_class(d2, ctx, true);
    CHECK(c1 == c2);  // odd rank: class not applicable
    CHECK(c1.rank == 3);
    CHECK(!c1.disc_class.has_value());

    ZMat e11(2, 2), e12(2, 2);
    e11(0, 0) = e11(1, 1) = 1;
    e12(0, 0) = 1;
    e12(1, 1) = 2;
    auto k1 = qform_class(e11, ctx, true), k2 = qform_class(e12, ctx, true);
    CHECK(k1 != k2);  // disc 1 vs 2 over F_3, even rank keeps the class
    CHECK(!congruent_up_to_scalar_2x2(e11, e12, 3));

    ZMat asym(2, 2, {0, 1, 2, 0});
    CHECK_THROWS_AS(qform_class(asym, ctx, true), NotSymmetric);

    // completeness over all symmetric 2x2 mod 3: equal class iff congruent up
    // to scalar
    std::vector<ZMat> all;
    for (i64 a = 0; a < 3; ++a)
        for (i64 b = 0; b < 3; ++b)
            for (i64 c = 0; c < 3; ++c) {
                ZMat q(2, 2);
                q(0, 0) = a;
                q(0, 1) = q(1, 0) = b;
                q(1, 1) = c;
                all.push_back(q);
            }
    for (size_t i = 0; i < all.size(); ++i)
        for (size_t j = i; j < all.size(); ++j) {
            bool same = qform_class(all[i], ctx, true) == qform_class(all[j], ctx, true);
            CHECK(same == congruent_up_to_scalar_2x2(all[i], all[j], 3));
        }
}

TEST_CASE("qform_class without scalar keeps odd-rank classes apart") {
    FieldContext ctx(3, 1);
    ZMat d1(3, 3), d2(3, 3);
    for (int i = 0; i < 3; ++i) {
        d1(i, i) = 1;
        d2(i, i) = 2;
    }
    CHECK(qform_class(d1, ctx, false) != qform_class(d2, ctx, false));  // disc 1 vs 8=2
}

TEST_CASE("quad matrices: det, inverse, rank over F_p^2") {
    FieldContext ctx(3, 1);
    auto g = testsup::rng(41);
    for (int t = 0; t < 30; ++t) {
        QMat a(3, 3);
        for (auto& x : a.data()) x = ctx.qmake(testsup::rnd_mod(g, 9), testsup::rnd_mod(g, 9), 2);
        Quad d = qm_det(a, ctx, 2);
        if (!ctx.qis_unit(d, 2)) continue;
        QMat inv = qm_inv(a, ctx, 2);
        CHECK(qm_mul(a, inv, ctx, 2) == qm_ident(3, ctx, 2));
        // det multiplicative against a second matrix
        QMat b(3, 3);
        for (auto& x : b.data()) x = ctx.qmake(testsup::rnd_mod(g, 9), testsup::rnd_mod(g, 9), 2);
        CHECK(qm_det(qm_mul(a, b, ctx, 2), ctx, 2) == ctx.qmul(d, qm_det(b, ctx, 2), 2));
    }
    QMat w = qm_ident(2, ctx, 1);
    w(0, 1) = ctx.qmake(0, 1, 1);
    CHECK(qm_rank(w, ctx) == 2);
    QMat sing(2, 2);
    sing(0, 0) = ctx.qmake(1, 1, 1);
    sing(1, 1) = ctx.qmake(0, 0, 1);
    CHECK(qm_rank(sing, ctx) == 1);
}
