#include <catch2/catch_amalgamated.hpp>

#include <map>
#include <set>

#include "test_support.hpp"

using namespace heckep;

static std::string form_key(const ZMat& h) {
    std::string s;
    s.reserve(h.data().size() * 3 + 8);
    s += std::to_string(h.rows());
    s += ':';
    for (auto x : h.data()) {
        s += std::to_string(x);
        s += ',';
    }
    return s;
}

TEST_CASE("tau matrices") {
    FieldContext ctx(3, 1);
    auto tp = tau(3, Variant::tp(), ctx);
    ZMat want(6, 6);
    for (int i = 0; i < 3; ++i) {
        want(i, i) = 1;
        want(3 + i, 3 + i) = 3;
    }
    CHECK(tp.mat == want);
    CHECK(gsp_check(tp.mat) == 3);

    auto tp1 = tau(3, Variant::tpi(1), ctx);
    ZMat want1(6, 6);
    i64 d[6] = {3, 1, 1, 3, 9, 9};
    for (int i = 0; i < 6; ++i) want1(i, i) = d[i];
    CHECK(tp1.mat == want1);
    CHECK(gsp_check(tp1.mat) == 9);

    auto tp3 = tau(3, Variant::tpi(3), ctx);
    CHECK(tp3.mat == zscale(3, zident(6)));
}

TEST_CASE("open atlas S(3)^open at p=3: count, membership, pairwise distinct") {
    FieldContext ctx(3, 1);
    auto atlas = enum_sg_open(ctx, 3);
    CHECK(atlas.size() == 729);

    bool has_zero = false;
    std::set<std::string> forms;
    for (const auto& r : atlas) {
        REQUIRE(gsp_check(r.mat) == 3);
        if (r.s == ZMat(3, 3)) has_zero = true;
        forms.insert(form_key(hermite_coset_form(r.mat, 3, 1)));
    }
    CHECK(has_zero);
    CHECK(forms.size() == atlas.size());  // pairwise non-coset-equal
}

TEST_CASE("full atlas S(3): chart sum, isotropic Grassmannian oracle, distinctness") {
    FieldContext ctx(3, 1);
    auto atlas = enum_sg_full3(ctx);
    CHECK(atlas.size() == 1120);  // 729+243+81+27+27+9+3+1
    CHECK(atlas.size() == (u_int64_t)((3 + 1) * (9 + 1) * (27 + 1)));

    // independent oracle: maximal isotropic subspaces of F_3^6
    CHECK(testsup::count_isotropic_grassmannian(3, 3) == 1120);

    std::set<std::string> forms;
    for (const auto& r : atlas) {
        REQUIRE(gsp_check(r.mat) == 3);
        forms.insert(form_key(hermite_coset_form(r.mat, 3, 1)));
    }
    CHECK(forms.size() == atlas.size());

    // chart I = {} is [[pE,0],[0,E]]
    const auto& last = atlas.back();
    CHECK(last.chart_i.empty());
    ZMat want(6, 6);
    for (int i = 0; i < 3; ++i) {
        want(i, i) = 3;
        want(3 + i, 3 + i) = 1;
    }
    CHECK(last.mat == want);
}

TEST_CASE("full atlas S(3) count matches chart-sum formula at p=5") {
    FieldContext ctx(5, FieldContext::Auto{});
    auto atlas = enum_sg_full3(ctx);
    CHECK(atlas.size() == (u_int64_t)((5 + 1) * (25 + 1) * (125 + 1)));
    std::set<std::string> forms;
    for (const auto& r : atlas) forms.insert(form_key(hermite_coset_form(r.mat, 5, 1)));
    CHECK(forms.size() == atlas.size());
}

TEST_CASE("open atlas S(3,1) at p=3: count and membership") {
    FieldContext ctx(3, 1);
    auto atlas = enum_sgi_open(ctx, 3, 1);
    CHECK(atlas.size() == 59049);  // p^10
    bool has_zero = false;
    auto g = testsup::rng(67);
    for (int t = 0; t < 500; ++t) {
        const auto& r = atlas[g() % atlas.size()];
        REQUIRE(gsp_check(r.mat) == 9);
    }
    for (const auto& r : atlas)
        if (r.A == ZMat(2, 1) && r.C == ZMat(2, 1) && r.U == ZMat(2, 2)) has_zero = true;
    CHECK(has_zero);
}

TEST_CASE("open atlas S(3,2): count, all pass gsp, pairwise distinct at p=3") {
    FieldContext ctx(3, 1);
    auto atlas = enum_sgi_open(ctx, 3, 2);
    CHECK(atlas.size() == 729);  // p^6
    std::set<std::string> forms;
    for (const auto& r : atlas) {
        REQUIRE(gsp_check(r.mat) == 9);
        forms.insert(form_key(hermite_coset_form(r.mat, 3, 2)));
    }
    CHECK(forms.size() == atlas.size());
}

TEST_CASE("double coset typing") {
    FieldContext ctx(3, 1);
    auto open3 = enum_sg_open(ctx, 3);
    for (int idx : {0, 13, 500}) {
        auto v = double_coset_type(open3[idx].mat, ctx);
        CHECK(v == Variant::tp());
    }
    auto tpis = enum_sgi_open(ctx, 3, 1);
    auto g = testsup::rng(71);
    for (int t = 0; t < 50; ++t) {
        const auto& r = tpis[g() % tpis.size()];
        auto v = double_coset_type(r.mat, ctx);
        CHECK(v == Variant::tpi(1));
        CHECK(smith_p_divisors(r.mat, 3) == std::vector<int>{0, 0, 1, 1, 2, 2});
    }
    auto tpis2 = enum_sgi_open(ctx, 3, 2);
    for (int t = 0; t < 50; ++t) {
        const auto& r = tpis2[g() % tpis2.size()];
        CHECK(double_coset_type(r.mat, ctx) == Variant::tpi(2));
    }
    CHECK(double_coset_type(tau(3, Variant::tpi(0), ctx).mat, ctx) == Variant::tpi(0));
    CHECK_THROWS_AS(double_coset_type(zident(6), ctx), UnrecognizedType);
}

TEST_CASE("w_subspace: open Tp reps give (E | s) mod p, 3-dim isotropic") {
    FieldContext ctx(3, 1);
    auto atlas = enum_sg_open(ctx, 3);
    ZMat j = symplectic_j(3);
    for (const auto& r : atlas) {
        auto w = w_subspace(r, ctx, 1);
        REQUIRE(w.gens.rows() == 3);
        CHECK(w.d1 == 3);
        // canonical form of (E | s) is itself
        ZMat es(3, 6);
        for (int i = 0; i < 3; ++i) {
            es(i, i) = 1;
            for (int jj = 0; jj < 3; ++jj) es(i, 3 + jj) = mod_reduce(r.s(i, jj), 3);
        }
        CHECK(w.gens == es);
        // isotropy for J mod p
        ZMat bj = zmod(zmul(zmul(w.gens, j), w.gens.transpose()), 3);
        for (auto x : bj.data()) CHECK(x == 0);
    }

    // tau_p rows give (E | 0)
    auto tp = tau(3, Variant::tp(), ctx);
    auto w = w_subspace(tp, ctx, 1);
    ZMat e0(3, 6);
    for (int i = 0; i < 3; ++i) e0(i, i) = 1;
    CHECK(w.gens == e0);
}

TEST_CASE("w_subspace mod p^2 of open Tpi reps has d1 = g-i, d2 = g+i") {
    FieldContext ctx(3, 1);
    for (int i : {1, 2}) {
        auto atlas = enum_sgi_open(ctx, 3, i);
        auto g = testsup::rng(73 + i);
        for (int t = 0; t < 200; ++t) {
            const auto& r = atlas[g() % atlas.size()];
            auto w = w_subspace(r, ctx, 2);
            CHECK(w.d1 == 3 - i);
            CHECK(w.d2 == 3 + i);
        }
    }
}

TEST_CASE("complex action: square is -Delta, spans behave per the proofs") {
    FieldContext ctx(3, 1);
    SignatureContext sig(3, 2, 1);

    // applied to (E | s): gives (-Delta s E_rs | E_rs)
    auto g = testsup::rng(79);
    ZMat s = testsup::rnd_symmetric(g, 3, 3);
    ZMat es(3, 6);
    for (int i = 0; i < 3; ++i) {
        es(i, i) = 1;
        for (int j = 0; j < 3; ++j) es(i, 3 + j) = s(i, j);
    }
    ZMat img = complex_action(es, Quad{0, 1}, ctx, sig, 1);
    ZMat want(3, 6);
    ZMat se = zmod(zscale(-ctx.delta(), zmul(s, sig.e_rs())), 3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            want(i, j) = se(i, j);
            want(i, 3 + j) = sig.e_rs()(i, j) >= 0 ? sig.e_rs()(i, j) : mod_reduce(sig.e_rs()(i, j), 3);
        }
    CHECK(img == zmod(want, 3));

    // square of the action is -Delta * identity
    for (int t = 0; t < 50; ++t) {
        ZMat v(1, 6);
        for (auto& x : v.data()) x = testsup::rnd_mod(g, 3);
        ZMat twice = complex_action(complex_action(v, Quad{0, 1}, ctx, sig, 1), Quad{0, 1}, ctx, sig, 1);
        CHECK(twice == zmod(zscale(-ctx.delta(), v), 3));
    }

    // dim of W + sqrt(-Delta) W for s = 0 is 6
    ZMat e0(3, 6);
    for (int i = 0; i < 3; ++i) e0(i, i) = 1;
    ZMat stacked(6, 6);
    ZMat je0 = complex_action(e0, Quad{0, 1}, ctx, sig, 1);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 6; ++j) {
            stacked(i, j) = e0(i, j);
            stacked(3 + i, j) = je0(i, j);
        }
    CHECK(rank_fp(stacked, 3) == 6);
}

TEST_CASE("F_p^2 span dims over the full atlas lie in {4,6} and are even") {
    FieldContext ctx(3, 1);
    SignatureContext sig(3, 2, 1);
    auto atlas = enum_sg_full3(ctx);
    std::map<int, int> dims;
    for (const auto& r : atlas) {
        auto w = w_subspace(r, ctx, 1);
        ZMat jw = complex_action(w.gens, Quad{0, 1}, ctx, sig, 1);
        ZMat stacked(6, 6);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 6; ++j) {
                stacked(i, j) = w.gens(i, j);
                stacked(3 + i, j) = jw(i, j);
            }
        ++dims[rank_fp(stacked, 3)];
    }
    for (auto [d, n] : dims) {
        CHECK((d == 4 || d == 6));
        CHECK(n > 0);
    }
}
