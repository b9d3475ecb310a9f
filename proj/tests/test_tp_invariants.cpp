#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "heckep/identities.hpp"
#include "test_support.hpp"

using namespace heckep;

static FieldContext ctx3() { return FieldContext(3, 1); }

// the rank-one family: s = [[0,0,0],[0,w1,w2],[0,w2,w1]] with
// Delta (w1^2 - w2^2) = -1 mod p^2
static ZMat bad_s(const FieldContext& ctx) {
    i64 p2 = ctx.p2();
    for (i64 w1 = 0; w1 < ctx.p(); ++w1)
        for (i64 w2 = 0; w2 < ctx.p(); ++w2)
            if (mod_reduce(ctx.delta() * (w1 * w1 - w2 * w2) + 1, p2) == 0) {
                ZMat s(3, 3);
                s(1, 1) = s(2, 2) = w1;
                s(1, 2) = s(2, 1) = w2;
                return s;
            }
    throw ArithError("no rank-one family parameters below p");
}

TEST_CASE("tp_invariant at s = 0: identity data") {
    auto ctx = ctx3();
    SignatureContext sig(3, 2, 1);
    auto rep = sigma_of_s(ZMat(3, 3), ctx);
    auto inv = tp_invariant(rep, ctx, sig);
    CHECK(qm_re(inv.t_mat) == zident(3));
    CHECK(qm_im(inv.t_mat) == ZMat(3, 3));
    CHECK(zmod(inv.T_mat, 9) == zmod(sig.e_rs(), 9));
    CHECK(inv.rank == 3);
    CHECK(inv.dpart == 6);
    CHECK(inv.cls == TpClass::Good);
    CHECK(inv.f1 == 1);
    CHECK(inv.f2 == 0);
    REQUIRE(inv.hpart.has_value());
    CHECK(*inv.hpart == std::make_pair((i64)1, (i64)0));
}

TEST_CASE("tp_invariant on the rank-one family") {
    auto ctx = ctx3();
    SignatureContext sig(3, 2, 1);
    ZMat s = bad_s(ctx);
    auto inv = tp_invariant(sigma_of_s(s, ctx), ctx, sig);
    ZMat want(3, 3);
    want(0, 0) = 1;
    CHECK(zmod(inv.T_mat, 9) == want);  // T = diag(1,0,0) mod p^2
    CHECK(inv.rank == 1);
    CHECK(inv.dpart == 4);
    CHECK(inv.cls == TpClass::Bad);
    CHECK(inv.f1 == 0);
    CHECK(inv.f2 == 0);
    CHECK(!inv.hpart.has_value());
    CHECK_THROWS_AS(h_part(sigma_of_s(s, ctx), ctx, sig), OnBaseLocus);
}

TEST_CASE("non-open representatives are refused") {
    auto ctx = ctx3();
    SignatureContext sig(3, 2, 1);
    auto full = enum_sg_full3(ctx);
    const auto& nonopen = full.back();  // chart I = {}
    CHECK_THROWS_AS(tp_invariant(nonopen, ctx, sig), NotOpenChart);
    CHECK_THROWS_AS(f_forms(nonopen, ctx, sig), NotOpenChart);
}

TEST_CASE("exhaustive p=3 scan: ranks, laws, base locus") {
    auto ctx = ctx3();
    SignatureContext sig(3, 2, 1);
    CHECK(checks::tp_rank_dimension_law(ctx, sig).empty());
    CHECK(checks::tp_t_identities(ctx, sig).empty());

    std::map<int, int> rank_count;
    for (const auto& rep : enum_sg_open(ctx, 3))
        ++rank_count[tp_invariant(rep, ctx, sig).rank];
    CHECK(rank_count.size() == 2);
    CHECK(rank_count.count(1) == 1);
    CHECK(rank_count.count(3) == 1);
}

TEST_CASE("rank/dimension law also at p=5") {
    FieldContext ctx(5, FieldContext::Auto{});
    SignatureContext sig(3, 2, 1);
    CHECK(checks::tp_rank_dimension_law(ctx, sig).empty());
}

TEST_CASE("h_part example: s = diag(1,0,0)") {
    auto ctx = ctx3();
    SignatureContext sig(3, 2, 1);
    ZMat s(3, 3);
    s(0, 0) = 1;
    // det t = det diag(1 - w, 1, 1) = 1 - w  =>  (f1 : f2) = (1 : -1) = (1 : 2)
    auto hp = h_part(sigma_of_s(s, ctx), ctx, sig);
    CHECK(hp == std::make_pair((i64)1, (i64)2));
}

TEST_CASE("h-partition of the top part has at most p+1 nonempty fibers") {
    auto ctx = ctx3();
    SignatureContext sig(3, 2, 1);
    std::set<std::pair<i64, i64>> fibers;
    int top = 0;
    for (const auto& rep : enum_sg_open(ctx, 3)) {
        auto inv = tp_invariant(rep, ctx, sig);
        if (inv.dpart != 6) continue;
        ++top;
        fibers.insert(*inv.hpart);
    }
    CHECK(top > 0);
    CHECK(fibers.size() <= 4);
    CHECK(fibers.size() == 4);  // all p+1 fibers are hit at p=3
}

TEST_CASE("f-linearity: fitted Pluecker forms reproduce f1, f2") {
    auto ctx = ctx3();
    SignatureContext sig(3, 2, 1);
    auto fit = fit_f_linear_forms(ctx, sig);
    // support pattern from the determinant expansion: real-part terms carry an
    // even number of primed columns (even powers of sqrt(-Delta)), imaginary
    // ones an odd number; at s=0 this puts the v_123 term inside f1
    std::vector<std::array<int, 3>> subsets;
    for (int a = 0; a < 6; ++a)
        for (int b = a + 1; b < 6; ++b)
            for (int c = b + 1; c < 6; ++c) subsets.push_back({a, b, c});
    REQUIRE(subsets.size() == 20);
    for (size_t t = 0; t < 20; ++t) {
        int primed = 0;
        for (int x : subsets[t]) primed += x >= 3 ? 1 : 0;
        if (fit.u[t] != 0) CHECK(primed % 2 == 0);
        if (fit.v[t] != 0) CHECK(primed % 2 == 1);
    }
    CHECK(fit.u[0] != 0);  // the all-unprimed coordinate feeds f1
    // v_123 coordinate of any open rep is 1 and v_1'2'3' is det s
    for (const auto& rep : enum_sg_open(ctx, 3)) {
        auto w = w_subspace(rep, ctx, 1);
        auto pt = pluecker(w.gens, 3);
        CHECK(pt[0] == 1);
        CHECK(pt[19] == mod_reduce((i64)(zdet_exact(zmod(rep.s, 3)) % 3), 3));
        auto [f1, f2] = f_forms(rep, ctx, sig);
        CHECK(eval_linear_form(fit.u, pt, 3) == mod_reduce(f1, 3));
        CHECK(eval_linear_form(fit.v, pt, 3) == mod_reduce(f2, 3));
    }
}

TEST_CASE("open-chart points span the same Pluecker subspace as the full atlas") {
    auto ctx = ctx3();
    auto count_span = [&](const std::vector<CosetRep>& atlas) {
        std::vector<std::vector<i64>> pts;
        for (const auto& rep : atlas) pts.push_back(pluecker(w_subspace(rep, ctx, 1).gens, 3));
        ZMat m((int)pts.size(), 20);
        for (int i = 0; i < (int)pts.size(); ++i)
            for (int j = 0; j < 20; ++j) m(i, j) = pts[i][j];
        return rank_fp(m, 3);
    };
    int open_rank = count_span(enum_sg_open(ctx, 3));
    int full_rank = count_span(enum_sg_full3(ctx));
    CHECK(open_rank == full_rank);
    // the isotropic Grassmannian spans a 14-dimensional subrepresentation
    CHECK(open_rank == 14);
}

TEST_CASE("orbit of the complex action: sizes, disjointness, fiber matching") {
    auto ctx = ctx3();
    SignatureContext sig(3, 2, 1);
    auto fit = fit_f_linear_forms(ctx, sig);

    auto orbit0 = f_orbit(sigma_of_s(ZMat(3, 3), ctx), ctx, sig);
    CHECK(orbit0.size() == 4);  // p + 1

    // orbits are disjoint or equal; on the top part each orbit meets each
    // nonempty hyperplane fiber exactly once (g odd)
    auto atlas = enum_sg_open(ctx, 3);
    auto g = testsup::rng(83);
    std::vector<std::vector<std::vector<i64>>> orbits;
    for (int t = 0; t < 30; ++t) {
        const auto& rep = atlas[g() % atlas.size()];
        auto inv = tp_invariant(rep, ctx, sig);
        if (inv.dpart != 6) continue;
        auto orb = f_orbit(rep, ctx, sig);
        CHECK(4 % orb.size() == 0);
        CHECK(orb.size() == 4);
        std::set<std::pair<i64, i64>> parts;
        for (const auto& pt : orb) {
            i64 f1 = eval_linear_form(fit.u, pt, 3), f2 = eval_linear_form(fit.v, pt, 3);
            REQUIRE(!(f1 == 0 && f2 == 0));
            parts.insert(p1_normalize(f1, f2, 3));
        }
        CHECK(parts.size() == orb.size());  // one orbit point per fiber
        orbits.push_back(orb);
    }
    for (size_t a = 0; a < orbits.size(); ++a)
        for (size_t b = a + 1; b < orbits.size(); ++b) {
            std::set<std::vector<i64>> sa(orbits[a].begin(), orbits[a].end());
            int common = 0;
            for (const auto& pt : orbits[b]) common += sa.count(pt);
            CHECK((common == 0 || common == (int)orbits[b].size()));
        }
}

TEST_CASE("complex action twists the hyperplane fiber by the degree-g scalar") {
    auto ctx = ctx3();
    SignatureContext sig(3, 2, 1);
    auto fit = fit_f_linear_forms(ctx, sig);
    auto atlas = enum_sg_open(ctx, 3);
    auto g = testsup::rng(89);
    int checked = 0;
    for (int t = 0; t < 60 && checked < 25; ++t) {
        const auto& rep = atlas[g() % atlas.size()];
        auto inv = tp_invariant(rep, ctx, sig);
        if (inv.dpart != 6) continue;
        ++checked;
        auto w = w_subspace(rep, ctx, 1);
        ZMat img = complex_action(w.gens, Quad{0, 1}, ctx, sig, 1);
        auto pt = pluecker(img, 3);
        i64 f1p = eval_linear_form(fit.u, pt, 3), f2p = eval_linear_form(fit.v, pt, 3);
        // (f1 + f2 w) * w^3 = -Delta w (f1 + f2 w) = Delta^2 f2 - Delta f1 w
        i64 e1 = mul_mod(mul_mod(ctx.delta(), ctx.delta(), 3), inv.f2, 3);
        i64 e2 = mod_reduce(-ctx.delta() * inv.f1, 3);
        REQUIRE(!(f1p == 0 && f2p == 0));
        CHECK(p1_normalize(f1p, f2p, 3) == p1_normalize(e1, e2, 3));
    }
    CHECK(checked == 25);
}
