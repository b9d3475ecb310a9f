#include <catch2/catch_amalgamated.hpp>

#include <set>

#include "test_support.hpp"

using namespace heckep;

TEST_CASE("gsp_check on tau and sigma(s)") {
    FieldContext ctx(3, 1);
    ZMat tp(6, 6);
    for (int i = 0; i < 3; ++i) {
        tp(i, i) = 1;
        tp(3 + i, 3 + i) = 3;
    }
    CHECK(gsp_check(tp) == 3);

    ZMat tp1(6, 6);
    i64 d[6] = {3, 1, 1, 3, 9, 9};
    for (int i = 0; i < 6; ++i) tp1(i, i) = d[i];
    CHECK(gsp_check(tp1) == 9);

    auto g = testsup::rng(43);
    ZMat s = testsup::rnd_symmetric(g, 3, 3);
    ZMat sig(6, 6);
    for (int i = 0; i < 3; ++i) {
        sig(i, i) = 1;
        sig(3 + i, 3 + i) = 3;
        for (int j = 0; j < 3; ++j) sig(i, 3 + j) = s(i, j);
    }
    CHECK(gsp_check(sig) == 3);

    // non-symmetric s breaks the identity
    ZMat bad = sig;
    bad(0, 4) = mod_reduce(bad(0, 4) + 1, 3);
    if (bad(0, 4) == bad(1, 3)) bad(0, 4) = mod_reduce(bad(0, 4) + 1, 3);
    CHECK(!gsp_check(bad).has_value());
}

TEST_CASE("gu_check basics") {
    FieldContext ctx(3, 1);
    SignatureContext sig(3, 2, 1);
    ZMat e = zident(3), z(3, 3);
    CHECK(gu_check(e, z, ctx, sig, 1) == 1);
    CHECK(gu_check(z, e, ctx, sig, 1) == ctx.delta() % 3);

    // scalar c = a + b w: lambda = norm(c) = a^2 + Delta b^2
    FieldContext c5(5, FieldContext::Auto{});
    SignatureContext s5(2, 1, 1);
    for (i64 a = 0; a < 5; ++a)
        for (i64 b = 0; b < 5; ++b) {
            ZMat h = zscale(a, zident(2)), k = zscale(b, zident(2));
            auto lam = gu_check(h, k, c5, s5, 1);
            REQUIRE(lam.has_value());
            CHECK(*lam == mod_reduce(a * a + c5.delta() * b * b, 5));
        }
}

TEST_CASE("alpha embedding lands in GSp with the same lambda") {
    FieldContext ctx(3, 1);
    SignatureContext sig(3, 2, 1);
    ZMat e = zident(3), z(3, 3);
    CHECK(alpha_embed(z, e, ctx.delta(), sig) ==
          ZMat(6, 6, {0, 0, 0, 1, 0, 0,
                      0, 0, 0, 0, 1, 0,
                      0, 0, 0, 0, 0, -1,
                      -1, 0, 0, 0, 0, 0,
                      0, -1, 0, 0, 0, 0,
                      0, 0, 1, 0, 0, 0}));

    const auto& roster = gu_roster(ctx, sig);
    auto g = testsup::rng(47);
    for (int t = 0; t < 100; ++t) {
        const auto& u = roster.elems()[g() % roster.size()];
        ZMat a = alpha_embed(u, ctx, sig);
        auto lam = gsp_check_mod(a, 3);
        REQUIRE(lam.has_value());
        CHECK(*lam == u.lambda);
    }
}

TEST_CASE("alpha is a homomorphism on random pairs from GU(2,1)(F_3)") {
    FieldContext ctx(3, 1);
    SignatureContext sig(3, 2, 1);
    const auto& roster = gu_roster(ctx, sig);
    auto g = testsup::rng(53);
    for (int t = 0; t < 100; ++t) {
        const auto& u1 = roster.elems()[g() % roster.size()];
        const auto& u2 = roster.elems()[g() % roster.size()];
        // product in GU computed through quad matrices
        QMat q1 = unitary_qmat(u1, ctx), q2 = unitary_qmat(u2, ctx);
        QMat q12 = qm_mul(q1, q2, ctx, 1);
        ZMat a12 = alpha_embed(qm_re(q12), qm_im(q12), ctx.delta(), sig);
        ZMat prod = zmod(zmul(alpha_embed(u1, ctx, sig), alpha_embed(u2, ctx, sig)), 3);
        CHECK(zmod(a12, 3) == prod);
    }
}

TEST_CASE("GU roster: identity present, order formula, closure") {
    FieldContext ctx(3, 1);
    SignatureContext sig(3, 2, 1);
    const auto& roster = gu_roster(ctx, sig);

    // order formula (p-1) p^{g(g-1)/2} prod (p^i - (-1)^i) = 2*27*4*8*28
    CHECK(GuRoster::expected_order(3, 3) == 48384);
    CHECK(roster.size() == 48384);

    bool has_identity = false;
    std::set<std::pair<std::vector<i64>, std::vector<i64>>> keys;
    for (const auto& u : roster.elems()) {
        REQUIRE(gu_check(u, ctx, sig) == u.lambda);
        REQUIRE(u.lambda != 0);
        keys.insert({u.h.data(), u.k.data()});
        if (u.h == zident(3) && u.k == ZMat(3, 3)) has_identity = true;
    }
    CHECK(has_identity);
    CHECK(keys.size() == roster.size());  // exactly once each

    // closure under multiplication and inverse on samples
    auto g = testsup::rng(59);
    for (int t = 0; t < 50; ++t) {
        const auto& u1 = roster.elems()[g() % roster.size()];
        const auto& u2 = roster.elems()[g() % roster.size()];
        QMat q12 = qm_mul(unitary_qmat(u1, ctx), unitary_qmat(u2, ctx), ctx, 1);
        CHECK(gu_check(qm_re(q12), qm_im(q12), ctx, sig, 1).has_value());
        CHECK(keys.count({qm_re(q12).data(), qm_im(q12).data()}) == 1);
        QMat qi = qm_inv(unitary_qmat(u1, ctx), ctx, 1);
        CHECK(keys.count({qm_re(qi).data(), qm_im(qi).data()}) == 1);
    }

    // similitude map is surjective onto F_p^*
    std::set<i64> lambdas;
    for (const auto& u : roster.elems()) lambdas.insert(u.lambda);
    CHECK(lambdas == std::set<i64>{1, 2});
}

TEST_CASE("GU roster for signature (1,2) has the same order") {
    FieldContext ctx(3, 1);
    SignatureContext sig(3, 1, 2);
    CHECK(gu_roster(ctx, sig).size() == 48384);
}

TEST_CASE("roster enumeration is budget guarded") {
    FieldContext ctx(5, FieldContext::Auto{});
    SignatureContext sig(3, 2, 1);
    CHECK(GuRoster::expected_order(5, 3) == 9072000);
    CHECK_THROWS_AS(GuRoster(ctx, sig, 1000000), BudgetExceeded);
}

TEST_CASE("lift to mod p^2 verifies and reduces back") {
    FieldContext ctx(3, 1);
    SignatureContext sig(3, 2, 1);
    const auto& roster = gu_roster(ctx, sig);

    // identity lifts to identity
    UnitaryElement id{zident(3), ZMat(3, 3), 1, 1};
    auto lid = lift_gu_mod_p2(id, ctx, sig);
    CHECK(lid.h == zident(3));
    CHECK(lid.k == ZMat(3, 3));

    // sqrt(-Delta) * 1 is already exact
    UnitaryElement w{ZMat(3, 3), zident(3), mod_reduce(ctx.delta(), 3), 1};
    auto lw = lift_gu_mod_p2(w, ctx, sig);
    CHECK(lw.h == ZMat(3, 3));
    CHECK(lw.k == zident(3));

    auto g = testsup::rng(61);
    for (int t = 0; t < 100; ++t) {
        const auto& u = roster.elems()[g() % roster.size()];
        auto l = lift_gu_mod_p2(u, ctx, sig);
        CHECK(gu_check(l, ctx, sig) == u.lambda);
        CHECK(zmod(l.h, 3) == u.h);
        CHECK(zmod(l.k, 3) == u.k);
        // ord_p det alpha(g) = ord_p norm(det g) on lifted samples
        ZMat a = alpha_embed(l.h, l.k, ctx.delta(), sig);
        QMat q = qm_make(l.h, l.k, ctx, 2);
        Quad dq = qm_det(q, ctx, 2);
        i64 nrm = ctx.qnorm(dq, 2);
        i128 da = zdet_exact(zmod(a, 9));
        // both are units here, so both ords are zero mod p
        CHECK(nrm % 3 != 0);
        CHECK(mod_reduce((i64)(da % 3), 3) != 0);
    }
}
