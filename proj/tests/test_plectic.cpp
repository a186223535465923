#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gerbecal/lie2.hpp"
#include "gerbecal/plectic.hpp"

using namespace gerbecal;
using namespace gerbecal::plectic;
using cartan::Form;
using cartan::VectorField;
using symexpr::Expr;

namespace {

Box box3() { return Box{{"x", "y", "z"}, {-2, -2, -2}, {2, 2, 2}}; }

PlecticManifold volume_plectic() {
    Box M = box3();
    Form chi(3, M);
    chi.add_term({0, 1, 2}, Expr::constant(1.0));
    return {M, chi};
}

VectorField basis_vf(const Box& b, int i) {
    VectorField v(b);
    v.components[static_cast<std::size_t>(i)] = Expr::constant(1.0);
    return v;
}

Form one_form(const Box& b, int i, Expr c) {
    Form f(1, b);
    f.add_term({i}, std::move(c));
    return f;
}

} // namespace

TEST_CASE("closedness of the 3-form") {
    VerifyCtx ctx;
    CHECK(volume_plectic().closedness_residual(ctx) <= 1e-9);
    Box M = box3();
    Form bad(3, M);
    bad.add_term({0, 1, 2}, Expr::var("x"));
    PlecticManifold P{M, bad};
    CHECK(P.closedness_residual(ctx) <= 1e-9); // top degree is always closed

    // a genuinely non-closed lower-degree check is covered in cartan tests
}

TEST_CASE("validate_ham_pair") {
    PlecticManifold P = volume_plectic();
    VerifyCtx ctx;
    Box M = P.M;

    HamPair good{basis_vf(M, 0), one_form(M, 2, Expr::constant(-1.0) * Expr::var("y"))};
    CHECK(validate_ham_pair(P, good, ctx) <= 1e-9);

    HamPair closed{VectorField(M), cartan::exterior_d(Form::from_scalar(Expr::var("x") * Expr::var("y"), M))};
    CHECK(validate_ham_pair(P, closed, ctx) <= 1e-9);

    HamPair bad{basis_vf(M, 0), Form(1, M)};
    CHECK(validate_ham_pair(P, bad, ctx) == doctest::Approx(1.0));
}

TEST_CASE("plectic_d") {
    PlecticManifold P = volume_plectic();
    VerifyCtx ctx;
    HamPair d1 = plectic_d(P, Expr::var("x"));
    CHECK(cartan::form_residual(d1.beta - one_form(P.M, 0, Expr::constant(1.0)), ctx, "dx").value <=
          1e-12);
    CHECK(validate_ham_pair(P, d1, ctx) <= 1e-9);

    HamPair dc = plectic_d(P, Expr::constant(4.0));
    CHECK(dc.beta.structurally_zero());

    HamPair dxy = plectic_d(P, Expr::var("x") * Expr::var("y"));
    Form expect = one_form(P.M, 0, Expr::var("y")) + one_form(P.M, 1, Expr::var("x"));
    CHECK(cartan::form_residual(dxy.beta - expect, ctx, "dxy").value <= 1e-12);
}

TEST_CASE("worked bracket and Jacobiator values") {
    PlecticManifold P = volume_plectic();
    VerifyCtx ctx;
    Box M = P.M;
    HamPair h1{basis_vf(M, 0), one_form(M, 2, Expr::constant(-1.0) * Expr::var("y"))};
    HamPair h2{basis_vf(M, 1), one_form(M, 0, Expr::constant(-1.0) * Expr::var("z"))};
    HamPair h3{basis_vf(M, 2), one_form(M, 1, Expr::constant(-1.0) * Expr::var("x"))};

    HamPair br = plectic_bracket(P, h1, h2);
    CHECK(cartan::vf_residual(br.xi, ctx, "brxi").value <= 1e-12);
    CHECK(cartan::form_residual(br.beta - one_form(M, 2, Expr::constant(1.0)), ctx, "brbeta").value <=
          1e-12);
    CHECK(validate_ham_pair(P, br, ctx) <= 1e-9);

    // [h, h] = 0
    HamPair self = plectic_bracket(P, h1, h1);
    CHECK(cartan::form_residual(self.beta, ctx, "self").value <= 1e-12);

    // bracket with a degree-1 image has zero field component
    HamPair mixed = plectic_bracket(P, plectic_d(P, Expr::var("x")), h1);
    CHECK(cartan::vf_residual(mixed.xi, ctx, "mixed").value <= 1e-12);
    CHECK(validate_ham_pair(P, mixed, ctx) <= 1e-9);

    Expr J = plectic_jacobiator(P, h1, h2, h3);
    CHECK(J.eval({{"x", 0.3}, {"y", -1.0}, {"z", 0.7}}) == doctest::Approx(-1.0));

    CHECK(plectic_jacobiator(P, HamPair::zero(M), h2, h3).normalized().is_zero());
}

TEST_CASE("bracket output is always Hamiltonian") {
    PlecticManifold P = volume_plectic();
    VerifyCtx ctx;
    auto pairs = sample_ham_pairs(P, 6, ctx.seed, "closure");
    for (std::size_t i = 0; i < pairs.size(); ++i)
        for (std::size_t j = 0; j < pairs.size(); ++j)
            CHECK(validate_ham_pair(P, plectic_bracket(P, pairs[i], pairs[j]), ctx) <= 1e-9);
}

TEST_CASE("Poisson Lie 2-algebra passes the axioms") {
    PlecticManifold P = volume_plectic();
    VerifyCtx ctx;
    PlecticModel m{&P, ctx};
    Box M = P.M;

    std::vector<HamPair> e0;
    e0.push_back({basis_vf(M, 0), one_form(M, 2, Expr::constant(-1.0) * Expr::var("y"))});
    e0.push_back({basis_vf(M, 1), one_form(M, 0, Expr::constant(-1.0) * Expr::var("z"))});
    e0.push_back({basis_vf(M, 2), one_form(M, 1, Expr::constant(-1.0) * Expr::var("x"))});
    auto extra = sample_ham_pairs(P, 2, ctx.seed, "axioms");
    e0.insert(e0.end(), extra.begin(), extra.end());

    std::vector<Expr> e1{Expr::var("x"), (Expr::var("y") * Expr::var("z")).normalized()};
    Report rep = lie2::check_lie2_axioms(m, e0, e1, ctx, "poisson_lie2");
    CHECK(rep.all_ok());
    CHECK(rep.worst_residual() <= 1e-9);
}

TEST_CASE("zero chi gives vanishing Jacobiator") {
    Box M = box3();
    PlecticManifold P{M, Form(3, M)};
    auto pairs = sample_ham_pairs(P, 3, 0x5EED, "flat");
    Expr J = plectic_jacobiator(P, pairs[0], pairs[1], pairs[2]);
    CHECK(J.normalized().is_zero());
}
