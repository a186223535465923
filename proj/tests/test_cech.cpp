#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gerbecal/cech.hpp"

using namespace gerbecal;
using namespace gerbecal::cech;
using symexpr::Expr;

namespace {

Box ambient3() { return Box{{"x", "y", "z"}, {-2, -2, -2}, {2, 2, 2}}; }

Cover two_chart_cover() {
    Box m = ambient3();
    Box u1 = m, u2 = m;
    u1.hi[0] = 1.0;  // x < 1
    u2.lo[0] = -1.0; // x > -1
    return Cover::build(m, {u1, u2});
}

// Two-chart fixture: A_12 = y dz, B_1 = x dy^dz, B_2 = x dy^dz + dy^dz.
DeligneCocycle fixture_f2(const Cover& cov) {
    DeligneCocycle c;
    c.phi.form_degree = 0;
    c.phi.depth = 3;
    c.A.form_degree = 1;
    c.A.depth = 2;
    c.B.form_degree = 2;
    c.B.depth = 1;

    Form a12(1, cov.overlap({0, 1}));
    a12.add_term({2}, Expr::var("y"));
    c.A.set({0, 1}, a12);

    Form b1(2, cov.charts[0]);
    b1.add_term({1, 2}, Expr::var("x"));
    c.B.set({0}, b1);

    Form b2(2, cov.charts[1]);
    b2.add_term({1, 2}, Expr::var("x") + Expr::constant(1.0));
    c.B.set({1}, b2);
    return c;
}

Cover three_chart_cover() {
    Box m{{"x", "y", "z"}, {-3, -2, -2}, {3, 2, 2}};
    Box u1 = m, u2 = m, u3 = m;
    u1.hi[0] = 1.0;
    u2.lo[0] = -1.0;
    u2.hi[0] = 2.0;
    u3.lo[0] = 0.0;
    return Cover::build(m, {u1, u2, u3});
}

} // namespace

TEST_CASE("cover construction and coverage") {
    Cover cov = two_chart_cover();
    CHECK(cov.tuples(1).size() == 2);
    CHECK(cov.tuples(2).size() == 1);
    CHECK(cov.overlap({0, 1}).lo[0] == doctest::Approx(-1.0));
    CHECK(cov.overlap({0, 1}).hi[0] == doctest::Approx(1.0));
    CHECK(cov.covers_ambient());

    Box m = ambient3();
    Box gap = m;
    gap.hi[0] = -1.5;
    Cover bad = Cover::build(m, {gap});
    CHECK(!bad.covers_ambient());
}

TEST_CASE("cech delta on chart functions") {
    Cover cov = two_chart_cover();
    CechForm g;
    g.form_degree = 0;
    g.depth = 1;
    g.set({0}, Form::from_scalar(Expr::var("x") * Expr::var("y"), cov.charts[0]));
    g.set({1}, Form::from_scalar(Expr::var("z"), cov.charts[1]));
    CechForm dg = cech_delta(cov, g);
    // (delta g)_{12} = g_2 - g_1
    Form expect = Form::from_scalar(Expr::var("z") - Expr::var("x") * Expr::var("y"),
                                    cov.overlap({0, 1}));
    VerifyCtx ctx;
    CHECK(cartan::form_residual(dg.at({0, 1}) - expect, ctx, "dg").value <= 1e-12);

    // constants die
    CechForm cst;
    cst.form_degree = 0;
    cst.depth = 1;
    cst.set({0}, Form::from_scalar(Expr::constant(3.5), cov.charts[0]));
    cst.set({1}, Form::from_scalar(Expr::constant(3.5), cov.charts[1]));
    CHECK(cartan::form_residual(cech_delta(cov, cst).at({0, 1}), ctx, "dc").value <= 1e-12);
}

TEST_CASE("delta squared vanishes on random data up to depth 3") {
    Cover cov = three_chart_cover();
    auto st = rng::derive(0x5EED, "dd");
    VerifyCtx ctx;
    for (int deg = 0; deg <= 1; ++deg) {
        CechForm f;
        f.form_degree = deg;
        f.depth = 1;
        for (const auto& idx : cov.tuples(1))
            f.set(idx, cartan::random_form(st, deg, cov.overlap(idx), 2));
        CechForm dd = cech_delta(cov, cech_delta(cov, f));
        auto r = cechform_residual(cov, dd, ctx, "dd");
        CHECK(r.value <= 1e-9);
    }
    CechForm depth2;
    depth2.form_degree = 1;
    depth2.depth = 2;
    for (const auto& idx : cov.tuples(2))
        depth2.set(idx, cartan::random_form(st, 1, cov.overlap(idx), 2));
    auto r = cechform_residual(cov, cech_delta(cov, cech_delta(cov, depth2)), VerifyCtx{}, "dd2");
    CHECK(r.value <= 1e-9);
}

TEST_CASE("depth limit") {
    Cover cov = three_chart_cover();
    CechForm f = CechForm::zeros(cov, 0, 1);
    CechForm d1 = cech_delta(cov, f);
    CechForm d2 = cech_delta(cov, d1);
    CHECK_THROWS_AS(cech_delta(cov, cech_delta(cov, d2)), DepthExceeded);
}

TEST_CASE("validate_deligne on the two-chart fixture") {
    Cover cov = two_chart_cover();
    DeligneCocycle c = fixture_f2(cov);
    VerifyCtx ctx;
    Report rep = validate_deligne(cov, c, ctx);
    CHECK(rep.all_ok());
    CHECK(rep.worst_residual() <= 1e-9);
}

TEST_CASE("validate_deligne flags the broken curving") {
    Cover cov = two_chart_cover();
    DeligneCocycle c = fixture_f2(cov);
    c.B.parts[{1}] = c.B.at({0}).with_domain(cov.charts[1]); // B_2 := B_1
    VerifyCtx ctx;
    Report rep = validate_deligne(cov, c, ctx);
    CHECK(!rep.all_ok());
    bool found = false;
    for (const auto& chk : rep.checks) {
        if (chk.status == Status::Fail) {
            found = true;
            CHECK(chk.residual == doctest::Approx(1.0).epsilon(1e-9));
            CHECK(chk.id.find("(1,2)") != std::string::npos);
        }
    }
    CHECK(found);
}

TEST_CASE("single chart cocycle validates vacuously") {
    Box m = ambient3();
    Cover cov = Cover::build(m, {m});
    Form omega(2, m);
    omega.add_term({1, 2}, Expr::var("x"));
    DeligneCocycle c = DeligneCocycle::trivial(cov, omega);
    VerifyCtx ctx;
    CHECK(validate_deligne(cov, c, ctx).all_ok());
}

TEST_CASE("three_curvature on fixtures") {
    VerifyCtx ctx;
    SUBCASE("two-chart fixture gives dx^dy^dz") {
        Cover cov = two_chart_cover();
        Form chi = three_curvature(cov, fixture_f2(cov), ctx);
        Form expect(3, cov.ambient);
        expect.add_term({0, 1, 2}, Expr::constant(1.0));
        CHECK(cartan::form_residual(chi - expect, ctx, "chi").value <= 1e-9);
        CHECK(cartan::form_residual(cartan::exterior_d(chi), ctx, "dchi").value <= 1e-9);
    }
    SUBCASE("trivial gerbe has curvature d omega") {
        Box m = ambient3();
        Cover cov = Cover::build(m, {m});
        Form omega(2, m);
        omega.add_term({1, 2}, Expr::var("x"));
        Form chi = three_curvature(cov, DeligneCocycle::trivial(cov, omega), ctx);
        Form expect(3, m);
        expect.add_term({0, 1, 2}, Expr::constant(1.0));
        CHECK(cartan::form_residual(chi - expect, ctx, "chi2").value <= 1e-9);
    }
    SUBCASE("closed curvings give zero") {
        Cover cov = two_chart_cover();
        DeligneCocycle c = fixture_f2(cov);
        // closed variant: B_1 = d(xy dz), B_2 = B_1 + dy^dz
        Form pot(1, cov.ambient);
        pot.add_term({2}, Expr::var("x") * Expr::var("y"));
        Form b1 = cartan::exterior_d(pot);
        Form unit(2, cov.ambient);
        unit.add_term({1, 2}, Expr::constant(1.0));
        c.B.parts[{0}] = b1.with_domain(cov.charts[0]);
        c.B.parts[{1}] = (b1 + unit).with_domain(cov.charts[1]);
        Form chi = three_curvature(cov, c, ctx);
        CHECK(cartan::form_residual(chi, ctx, "chi0").value <= 1e-9);
    }
}

TEST_CASE("three_curvature detects gluing mismatch") {
    Cover cov = two_chart_cover();
    DeligneCocycle c = fixture_f2(cov);
    // incompatible curvature: B_2 has an extra x*z dy^dz term
    Form extra(2, cov.charts[1]);
    extra.add_term({1, 2}, Expr::var("x") * Expr::var("z"));
    c.B.parts[{1}] = c.B.at({1}) + extra;
    VerifyCtx ctx;
    CHECK_THROWS_AS(three_curvature(cov, c, ctx), GluingMismatch);
}

TEST_CASE("validate_trivialization") {
    Cover cov = two_chart_cover();
    DeligneCocycle c = fixture_f2(cov);
    VerifyCtx ctx;

    Trivialization t;
    t.psi.form_degree = 0;
    t.psi.depth = 2;
    t.psi.set({0, 1}, Form::from_scalar(Expr(), cov.overlap({0, 1})));
    t.eta.form_degree = 1;
    t.eta.depth = 1;
    t.eta.set({0}, Form(1, cov.charts[0]));
    Form eta2(1, cov.charts[1]);
    eta2.add_term({2}, Expr::var("y"));
    t.eta.set({1}, eta2);
    Form omega(2, cov.ambient);
    omega.add_term({1, 2}, Expr::var("x"));
    t.omega = omega;

    SUBCASE("valid data passes") {
        Report rep = validate_trivialization(cov, c, t, ctx);
        CHECK(rep.all_ok());
    }
    SUBCASE("zero eta_2 fails the connection condition") {
        t.eta.parts[{1}] = Form(1, cov.charts[1]);
        Report rep = validate_trivialization(cov, c, t, ctx);
        CHECK(!rep.all_ok());
        bool found = false;
        for (const auto& chk : rep.checks)
            if (chk.status == Status::Fail && chk.id.find("connection") != std::string::npos)
                found = true;
        CHECK(found);
    }
    SUBCASE("single chart trivialization") {
        Box m = ambient3();
        Cover single = Cover::build(m, {m});
        Form om(2, m);
        om.add_term({1, 2}, Expr::var("x"));
        DeligneCocycle tc = DeligneCocycle::trivial(single, om);
        Trivialization tt;
        tt.psi.form_degree = 0;
        tt.psi.depth = 2;
        tt.eta.form_degree = 1;
        tt.eta.depth = 1;
        tt.eta.set({0}, Form(1, m));
        tt.omega = om;
        CHECK(validate_trivialization(single, tc, tt, ctx).all_ok());
    }
}

TEST_CASE("closed depth-1 data glues and restricts back") {
    Cover cov = three_chart_cover();
    VerifyCtx ctx;
    auto st = rng::derive(0x5EED, "glue");
    // build a cocycle by restricting a global form
    Form global = cartan::random_form(st, 1, cov.ambient, 3);
    CechForm zeta;
    zeta.form_degree = 1;
    zeta.depth = 1;
    std::map<int, Form> pieces;
    for (const auto& idx : cov.tuples(1)) {
        zeta.set(idx, global.with_domain(cov.overlap(idx)));
        pieces[idx[0]] = global.with_domain(cov.overlap(idx));
    }
    auto r = cechform_residual(cov, cech_delta(cov, zeta), ctx, "closed");
    CHECK(r.value <= 1e-9);
    Form glued = glue_chart_forms(cov, pieces, ctx, "roundtrip");
    for (const auto& idx : cov.tuples(1)) {
        Form diff = glued.with_domain(cov.overlap(idx)) - zeta.at(idx);
        CHECK(cartan::form_residual(diff, ctx, "restrict").value <= 1e-9);
    }
}
