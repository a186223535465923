#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gerbecal/cartan.hpp"

using namespace gerbecal;
using namespace gerbecal::cartan;
using symexpr::Expr;

namespace {

Box box3() { return Box{{"x", "y", "z"}, {-2, -2, -2}, {2, 2, 2}}; }

Expr X() { return Expr::var("x"); }
Expr Y() { return Expr::var("y"); }
Expr Z() { return Expr::var("z"); }

VectorField basis_vf(const Box& b, int i) {
    VectorField v(b);
    v.components[static_cast<std::size_t>(i)] = Expr::constant(1.0);
    return v;
}

double resid(const Form& f) {
    VerifyCtx ctx;
    return form_residual(f, ctx, "test").value;
}

} // namespace

TEST_CASE("wedge basics") {
    Box b = box3();
    Form dx(1, b), dy(1, b), dz(1, b);
    dx.add_term({0}, Expr::constant(1.0));
    dy.add_term({1}, Expr::constant(1.0));
    dz.add_term({2}, Expr::constant(1.0));

    CHECK(wedge(dx, dx).structurally_zero());

    Form xdy = Expr::var("x") * dy;
    Form w = wedge(xdy, dz);
    CHECK(resid(w - [&] {
        Form e(2, b);
        e.add_term({1, 2}, X());
        return e;
    }()) == doctest::Approx(0.0));

    // (dx+dy) ^ (dx-dy) = -2 dx^dy, by bilinear expansion
    Form s = dx + dy, d = dx - dy;
    Form expect(2, b);
    expect.add_term({0, 1}, Expr::constant(-2.0));
    CHECK(resid(wedge(s, d) - expect) == doctest::Approx(0.0));
}

TEST_CASE("wedge graded commutativity on random forms") {
    auto st = rng::derive(0x5EED, "wedge-comm");
    VerifyCtx ctx;
    Box b = box3();
    for (int ka = 0; ka <= 2; ++ka) {
        for (int kb = 0; kb <= 2; ++kb) {
            Form a = random_form(st, ka, b, 2);
            Form c = random_form(st, kb, b, 2);
            double sign = (ka * kb) % 2 == 0 ? 1.0 : -1.0;
            Form r = wedge(a, c) - sign * wedge(c, a);
            CHECK(form_residual(r, ctx, "wedge-comm").value <= 1e-9);
        }
    }
}

TEST_CASE("exterior derivative examples") {
    Box b = box3();
    Form f(2, b);
    f.add_term({1, 2}, X()); // x dy^dz
    Form df = exterior_d(f);
    Form expect(3, b);
    expect.add_term({0, 1, 2}, Expr::constant(1.0));
    CHECK(resid(df - expect) == doctest::Approx(0.0));

    Form g = Form::from_scalar(pow_int(X(), 2) * Y() + sin(Z()), b);
    CHECK(resid(exterior_d(exterior_d(g))) == doctest::Approx(0.0));

    Form xdy(1, b);
    xdy.add_term({1}, X());
    Form expect2(2, b);
    expect2.add_term({0, 1}, Expr::constant(1.0));
    CHECK(resid(exterior_d(xdy) - expect2) == doctest::Approx(0.0));
}

TEST_CASE("d squared vanishes on random forms") {
    auto st = rng::derive(0x5EED, "d2");
    VerifyCtx ctx;
    Box b = box3();
    for (int deg = 0; deg <= 2; ++deg) {
        for (int k = 0; k < 10; ++k) {
            Form f = random_form(st, deg, b, 3);
            CHECK(form_residual(exterior_d(exterior_d(f)), ctx, "d2").value <= 1e-9);
        }
    }
}

TEST_CASE("interior product sign bookkeeping") {
    Box b = box3();
    Form vol(3, b);
    vol.add_term({0, 1, 2}, Expr::constant(1.0));

    // i_{dy-direction} (dx^dy^dz) = -dx^dz
    Form got = interior(basis_vf(b, 1), vol);
    Form expect(2, b);
    expect.add_term({0, 2}, Expr::constant(-1.0));
    CHECK(resid(got - expect) == doctest::Approx(0.0));

    Form dx(1, b);
    dx.add_term({0}, Expr::constant(1.0));
    CHECK(interior(basis_vf(b, 0), dx).scalar().normalized().is_constant(1.0));

    VectorField Xf(b);
    Xf.components[0] = X();
    Xf.components[1] = Y();
    Form dxdy(2, b);
    dxdy.add_term({0, 1}, Expr::constant(1.0));
    CHECK(resid(interior(Xf, interior(Xf, dxdy))) == doctest::Approx(0.0));

    CHECK_THROWS_AS(interior(Xf, Form::from_scalar(X(), b)), DegreeError);
}

TEST_CASE("interior nilpotence on random data") {
    auto st = rng::derive(0x5EED, "iota2");
    VerifyCtx ctx;
    Box b = box3();
    for (int k = 0; k < 10; ++k) {
        Form f = random_form(st, 3, b, 3);
        VectorField v = random_vf(st, b, 3);
        CHECK(form_residual(interior(v, interior(v, f)), ctx, "iota2").value <= 1e-9);
    }
}

TEST_CASE("lie derivative examples") {
    Box b = box3();
    Form f(2, b);
    f.add_term({1, 2}, X()); // x dy^dz
    Form got = lie_derivative(basis_vf(b, 0), f);
    Form expect(2, b);
    expect.add_term({1, 2}, Expr::constant(1.0));
    CHECK(resid(got - expect) == doctest::Approx(0.0));

    // 0-forms: L_X f = i_X df
    auto st = rng::derive(0x5EED, "lie0");
    VerifyCtx ctx;
    for (int k = 0; k < 5; ++k) {
        Form h = Form::from_scalar(random_polynomial(st, b.coords, 3), b);
        VectorField v = random_vf(st, b, 2);
        Form r = lie_derivative(v, h) - interior(v, exterior_d(h));
        CHECK(form_residual(r, ctx, "lie0").value <= 1e-9);
    }
}

TEST_CASE("lie derivative matches flow finite difference") {
    auto st = rng::derive(0x5EED, "lieflow");
    VerifyCtx ctx;
    ctx.samples = 10;
    Box b = box3();
    for (int deg = 1; deg <= 2; ++deg) {
        // mild field scale keeps the O(h^2) truncation of the central
        // difference well below the 1e-5 gate
        VectorField v = 0.125 * random_vf(st, b, 1);
        Form f = random_form(st, deg, b, 2);
        double r = lie_derivative_flow_residual(v, f, ctx, 1e-4, "lieflow");
        CHECK(r <= 1e-5);
    }
}

TEST_CASE("vector field bracket") {
    Box b = box3();
    // [d/dx, x d/dy] = d/dy
    VectorField v = basis_vf(b, 0);
    VectorField w(b);
    w.components[1] = X();
    VectorField got = vf_bracket(v, w);
    CHECK(got.components[0].normalized().is_zero());
    CHECK(got.components[1].normalized().is_constant(1.0));
    CHECK(got.components[2].normalized().is_zero());

    auto st = rng::derive(0x5EED, "vfb");
    VerifyCtx ctx;
    for (int k = 0; k < 8; ++k) {
        VectorField a = random_vf(st, b, 3);
        VectorField c = random_vf(st, b, 3);
        VectorField d = random_vf(st, b, 3);
        CHECK(vf_residual(vf_bracket(a, a), ctx, "xx").value <= 1e-9);
        VectorField jac = vf_bracket(a, vf_bracket(c, d)) + vf_bracket(c, vf_bracket(d, a)) +
                          vf_bracket(d, vf_bracket(a, c));
        CHECK(vf_residual(jac, ctx, "jacobi").value <= 1e-9);
    }
}

TEST_CASE("Cartan relations on random data") {
    auto st = rng::derive(0x5EED, "cartan-rel");
    VerifyCtx ctx;
    Box b = box3();
    for (int k = 0; k < 8; ++k) {
        VectorField v = random_vf(st, b, 2);
        VectorField w = random_vf(st, b, 2);
        Form f = random_form(st, 2, b, 2);

        Form magic = lie_derivative(v, f) - interior(v, exterior_d(f)) - exterior_d(interior(v, f));
        CHECK(form_residual(magic, ctx, "magic").value <= 1e-9);

        Form mix = lie_derivative(v, interior(w, f)) - interior(w, lie_derivative(v, f)) -
                   interior(vf_bracket(v, w), f);
        CHECK(form_residual(mix, ctx, "mixed").value <= 1e-9);

        Form lb = lie_derivative(vf_bracket(v, w), f) -
                  (lie_derivative(v, lie_derivative(w, f)) - lie_derivative(w, lie_derivative(v, f)));
        CHECK(form_residual(lb, ctx, "liebracket").value <= 1e-9);
    }
}

TEST_CASE("graded Leibniz for d") {
    auto st = rng::derive(0x5EED, "graded-leibniz");
    VerifyCtx ctx;
    Box b = box3();
    for (int ka = 0; ka <= 2; ++ka) {
        for (int kb = 0; kb + ka <= 2; ++kb) {
            Form a = random_form(st, ka, b, 2);
            Form c = random_form(st, kb, b, 2);
            double sign = ka % 2 == 0 ? 1.0 : -1.0;
            Form r = exterior_d(wedge(a, c)) - wedge(exterior_d(a), c) - sign * wedge(a, exterior_d(c));
            CHECK(form_residual(r, ctx, "gl").value <= 1e-9);
        }
    }
}

TEST_CASE("poincare primitive inverts d on star-shaped boxes") {
    auto st = rng::derive(0x5EED, "poincare");
    VerifyCtx ctx;
    Box b = box3();
    for (int deg = 1; deg <= 3; ++deg) {
        for (int k = 0; k < 5; ++k) {
            Form w = random_form(st, deg, b, 3);
            Form lhs = exterior_d(poincare_primitive(w));
            if (deg < static_cast<int>(b.dim())) lhs = lhs + poincare_primitive(exterior_d(w));
            else if (!exterior_d(w).structurally_zero())
                lhs = lhs + poincare_primitive(exterior_d(w));
            CHECK(form_residual(lhs - w, ctx, "hk").value <= 1e-9);
        }
    }
}

TEST_CASE("appendix identity on the worked instance") {
    Box b = box3();
    VerifyCtx ctx;
    Form B(2, b);
    B.add_term({1, 2}, X()); // x dy^dz
    VectorField vx = basis_vf(b, 0), vy = basis_vf(b, 1), vz = basis_vf(b, 2);
    Form a(1, b);
    a.add_term({2}, Y()); // y dz
    Form bb(1, b), cc(1, b);
    auto rep = check_appendix_identity(B, vx, vy, vz, a, bb, cc, ctx);
    CHECK(rep.residual <= 1e-9);
}

TEST_CASE("appendix identity, all zero") {
    Box b = box3();
    VerifyCtx ctx;
    auto rep = check_appendix_identity(Form(2, b), VectorField(b), VectorField(b), VectorField(b),
                                       Form(1, b), Form(1, b), Form(1, b), ctx);
    CHECK(rep.residual == doctest::Approx(0.0));
}

TEST_CASE("appendix identity rejects broken hypotheses") {
    Box b = box3();
    VerifyCtx ctx;
    Form B(2, b);
    B.add_term({1, 2}, X());
    VectorField vx = basis_vf(b, 0);
    // a = 0 while L_X B = dy^dz != 0
    CHECK_THROWS_AS(check_appendix_identity(B, vx, vx, vx, Form(1, b), Form(1, b), Form(1, b), ctx),
                    PreconditionFailed);
}

TEST_CASE("appendix identity on randomized instances with built potentials") {
    auto st = rng::derive(0x5EED, "appendix-rand");
    VerifyCtx ctx;
    Box b = box3();
    for (int k = 0; k < 20; ++k) {
        // closed part plus a constant-coefficient top-degree source keeps the
        // Lie derivatives of B exact along divergence-free fields
        Form B = exterior_d(random_form(st, 1, b, 3));
        Form extra(2, b);
        extra.add_term({1, 2}, Expr::constant(st.uniform_int(1, 3)) * X());
        B = B + extra;
        VectorField vX = random_divfree_vf(st, b, 2);
        VectorField vY = random_divfree_vf(st, b, 2);
        VectorField vZ = random_divfree_vf(st, b, 2);
        Form a = poincare_primitive(lie_derivative(vX, B));
        Form bb = poincare_primitive(lie_derivative(vY, B));
        Form cc = poincare_primitive(lie_derivative(vZ, B));
        auto rep = check_appendix_identity(B, vX, vY, vZ, a, bb, cc, ctx);
        CHECK(rep.residual <= 1e-9);
    }
}
