// End-to-end acceptance battery: one pass/fail line per criterion.
#include <cstdio>
#include <string>
#include <vector>

#include "gerbecal/bundle.hpp"

using namespace gerbecal;
using cartan::Form;
using cartan::VectorField;
using symexpr::Expr;

namespace {

int failures = 0;

void line(int criterion, bool ok, const std::string& desc, double residual) {
    if (!ok) ++failures;
    std::printf("[%s] criterion %2d: %s (worst residual %.3e)\n", ok ? "PASS" : "FAIL", criterion,
                desc.c_str(), residual);
}

Box box3() { return Box{{"x", "y", "z"}, {-2, -2, -2}, {2, 2, 2}}; }

std::string fixture(const std::string& name) {
    return std::string(GERBECAL_FIXTURE_DIR) + "/" + name;
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

void criterion_1(const VerifyCtx& ctx) {
    auto st = rng::derive(ctx.seed, "acceptance.cartan");
    Box M = box3();
    double worst = 0;
    for (int round = 0; round < 100; ++round) {
        int deg = 1 + round % 2;
        Form f = cartan::random_form(st, deg, M, 3);
        Form g = cartan::random_form(st, 2 - round % 2, M, 3);
        VectorField X = cartan::random_vf(st, M, 3);
        VectorField Y = cartan::random_vf(st, M, 3);

        worst = std::max(worst, cartan::form_residual(cartan::exterior_d(cartan::exterior_d(f)),
                                                      ctx, "acc1.d2")
                                    .value);
        Form magic = cartan::lie_derivative(X, f) - cartan::interior(X, cartan::exterior_d(f)) -
                     cartan::exterior_d(cartan::interior(X, f));
        worst = std::max(worst, cartan::form_residual(magic, ctx, "acc1.magic").value);
        Form mixed = cartan::lie_derivative(X, cartan::interior(Y, f)) -
                     cartan::interior(Y, cartan::lie_derivative(X, f)) -
                     cartan::interior(cartan::vf_bracket(X, Y), f);
        worst = std::max(worst, cartan::form_residual(mixed, ctx, "acc1.mixed").value);
        double sign = deg % 2 == 0 ? 1.0 : -1.0;
        Form leib = cartan::exterior_d(cartan::wedge(f, g)) -
                    cartan::wedge(cartan::exterior_d(f), g) -
                    sign * cartan::wedge(f, cartan::exterior_d(g));
        worst = std::max(worst, cartan::form_residual(leib, ctx, "acc1.leibniz").value);
    }
    line(1, worst <= ctx.tol, "Cartan kernel identities on 100 randomized instances", worst);
}

void criterion_2(const VerifyCtx& ctx) {
    Box M = box3();
    double worst = 0;
    {
        Form B(2, M);
        B.add_term({1, 2}, Expr::var("x"));
        Form a = one_form(M, 2, Expr::var("y"));
        auto rep = cartan::check_appendix_identity(B, basis_vf(M, 0), basis_vf(M, 1),
                                                   basis_vf(M, 2), a, Form(1, M), Form(1, M), ctx);
        worst = std::max(worst, rep.residual);
    }
    auto st = rng::derive(ctx.seed, "acceptance.appendix");
    for (int k = 0; k < 20; ++k) {
        Form B = cartan::exterior_d(cartan::random_form(st, 1, M, 3));
        Form extra(2, M);
        extra.add_term({1, 2}, Expr::constant(st.uniform_int(1, 3)) * Expr::var("x"));
        B = B + extra;
        VectorField X = cartan::random_divfree_vf(st, M, 2);
        VectorField Y = cartan::random_divfree_vf(st, M, 2);
        VectorField Z = cartan::random_divfree_vf(st, M, 2);
        auto rep = cartan::check_appendix_identity(
            B, X, Y, Z, cartan::poincare_primitive(cartan::lie_derivative(X, B)),
            cartan::poincare_primitive(cartan::lie_derivative(Y, B)),
            cartan::poincare_primitive(cartan::lie_derivative(Z, B)), ctx);
        worst = std::max(worst, rep.residual);
    }
    line(2, worst <= ctx.tol, "degree-3 obstruction identity, fixture plus 20 randomized", worst);
}

void criterion_3(const VerifyCtx& ctx) {
    bool ok = true;
    double show = 0;

    auto b = bundle::load_bundle(fixture("f2.json"));
    Report val = cech::validate_deligne(b.cover, b.deligne, ctx);
    ok = ok && val.all_ok();
    show = std::max(show, val.worst_residual());
    Form chi = cech::three_curvature(b.cover, b.deligne, ctx);
    Form expect(3, b.cover.ambient);
    expect.add_term({0, 1, 2}, Expr::constant(1.0));
    double glue = cartan::form_residual(chi - expect, ctx, "acc3.chi").value;
    ok = ok && glue <= ctx.tol;
    show = std::max(show, glue);

    auto broken = bundle::load_bundle(fixture("f2_broken.json"));
    Report bad = cech::validate_deligne(broken.cover, broken.deligne, ctx);
    bool saw_unit_residual = false;
    for (const auto& c : bad.checks)
        if (c.status == Status::Fail && std::abs(c.residual - 1.0) <= 1e-9) saw_unit_residual = true;
    ok = ok && !bad.all_ok() && saw_unit_residual;

    line(3, ok, "Deligne fixtures validate; broken curving fails at unit residual", show);
}

void criterion_4(const VerifyCtx& ctx) {
    auto b = bundle::load_bundle(fixture("f2.json"));
    auto st = rng::derive(ctx.seed, "acceptance.defect");
    double worst = 0;
    for (int k = 0; k < 20; ++k) {
        VectorField X = cartan::random_vf(st, b.cover.ambient, 2);
        VectorField Y = cartan::random_vf(st, b.cover.ambient, 2);
        VectorField Z = cartan::random_vf(st, b.cover.ambient, 2);
        Report r = gerbevf::morphism_defect_check(b.cover, b.deligne, X, Y, Z, ctx, "acc4");
        worst = std::max(worst, r.worst_residual());
        if (!r.all_ok()) worst = std::max(worst, 1.0);
    }

    // flat variant: closed curvings, defect vanishes identically
    cech::DeligneCocycle flat = b.deligne;
    Form pot(1, b.cover.ambient);
    pot.add_term({2}, Expr::var("x") * Expr::var("y"));
    Form b1 = cartan::exterior_d(pot);
    Form unit(2, b.cover.ambient);
    unit.add_term({1, 2}, Expr::constant(1.0));
    flat.B.parts[{0}] = b1.with_domain(b.cover.charts[0]);
    flat.B.parts[{1}] = (b1 + unit).with_domain(b.cover.charts[1]);
    for (int k = 0; k < 5; ++k) {
        VectorField X = cartan::random_vf(st, b.cover.ambient, 2);
        VectorField Y = cartan::random_vf(st, b.cover.ambient, 2);
        VectorField Z = cartan::random_vf(st, b.cover.ambient, 2);
        double flat_resid = gerbevf::section_residual(
            gerbevf::morphism_defect(b.cover, flat, X, Y, Z), ctx, "acc4.flat");
        worst = std::max(worst, flat_resid);
    }
    line(4, worst <= ctx.tol, "horizontal-lift defect equals the 3-curvature contraction", worst);
}

void criterion_5(const VerifyCtx& ctx) {
    auto b = bundle::load_bundle(fixture("f2.json"));
    plectic::PlecticManifold P{b.cover.ambient, *b.plectic_form};
    gerbevf::GerbeVfModel m{&b.cover, &b.deligne, ctx};
    std::vector<gerbevf::ConnMultVF> e0;
    for (const auto& h : plectic::sample_ham_pairs(P, 4, ctx.seed, "acc5"))
        e0.push_back(gerbevf::conn_from_ham(b.cover, b.deligne, h));
    auto st = rng::derive(ctx.seed, "acc5.sections");
    std::vector<gerbevf::AlgebroidSection> e1{gerbevf::random_section(b.cover, st),
                                              gerbevf::random_section(b.cover, st)};
    e0[3] = e0[3] + gerbevf::diff_x(b.cover, e1[0]);
    Report rep = lie2::check_lie2_axioms(m, e0, e1, ctx, "acc5");
    line(5, rep.all_ok() && rep.worst_residual() <= ctx.tol,
         "connection-preserving fields form a strict Lie 2-algebra", rep.worst_residual());
}

void criterion_6(const VerifyCtx& ctx) {
    Box M = box3();
    Form chi(3, M);
    chi.add_term({0, 1, 2}, Expr::constant(1.0));
    plectic::PlecticManifold P{M, chi};

    plectic::HamPair h1{basis_vf(M, 0), one_form(M, 2, Expr::constant(-1.0) * Expr::var("y"))};
    plectic::HamPair h2{basis_vf(M, 1), one_form(M, 0, Expr::constant(-1.0) * Expr::var("z"))};
    plectic::HamPair h3{basis_vf(M, 2), one_form(M, 1, Expr::constant(-1.0) * Expr::var("x"))};

    double worst = 0;
    plectic::HamPair br = plectic::plectic_bracket(P, h1, h2);
    worst = std::max(worst, cartan::vf_residual(br.xi, ctx, "acc6.xi").value);
    worst = std::max(
        worst,
        cartan::form_residual(br.beta - one_form(M, 2, Expr::constant(1.0)), ctx, "acc6.b").value);
    Expr J = plectic::plectic_jacobiator(P, h1, h2, h3);
    worst = std::max(worst, std::abs(J.eval({{"x", 0.2}, {"y", 0.4}, {"z", -0.9}}) + 1.0));

    plectic::PlecticModel m{&P, ctx};
    std::vector<plectic::HamPair> e0{h1, h2, h3};
    auto extra = plectic::sample_ham_pairs(P, 2, ctx.seed, "acc6");
    e0.insert(e0.end(), extra.begin(), extra.end());
    std::vector<Expr> e1{Expr::var("x"), (Expr::var("y") * Expr::var("z")).normalized()};
    Report rep = lie2::check_lie2_axioms(m, e0, e1, ctx, "acc6");
    worst = std::max(worst, rep.worst_residual());
    line(6, rep.all_ok() && worst <= ctx.tol,
         "Poisson Lie 2-algebra axioms and worked bracket/Jacobiator values", worst);
}

void criterion_7(const VerifyCtx& ctx) {
    double worst = 0;
    bool ok = true;
    {
        auto b = bundle::load_bundle(fixture("trivial_single.json"));
        plectic::PlecticManifold P{b.cover.ambient, *b.plectic_form};
        auto bE = quantomorph::GerbeButterfly::build_E(b.cover, b.deligne, P, ctx);
        Report rep = quantomorph::check_geometric_butterfly(bE, ctx, "acc7.single", 11);
        ok = ok && rep.all_ok();
        worst = std::max(worst, rep.worst_residual());
    }
    {
        auto b = bundle::load_bundle(fixture("f2.json"));
        plectic::PlecticManifold P{b.cover.ambient, *b.plectic_form};
        auto bE = quantomorph::GerbeButterfly::build_E(b.cover, b.deligne, P, ctx);
        Report rep = quantomorph::check_geometric_butterfly(bE, ctx, "acc7.f2", 11);
        ok = ok && rep.all_ok();
        worst = std::max(worst, rep.worst_residual());
    }
    line(7, ok && worst <= ctx.tol,
         "prequantization butterfly: bullets, section round trip, kernel witnesses", worst);
}

void criterion_8(const VerifyCtx& ctx) {
    auto b = bundle::load_bundle(fixture("f2.json"));
    plectic::PlecticManifold P{b.cover.ambient, *b.plectic_form};
    auto bQ = quantomorph::GerbeButterfly::build_Q(b.cover, b.deligne, *b.trivialization, ctx);
    Report repQ = quantomorph::check_geometric_butterfly(bQ, ctx, "acc8.Q", 6);

    cech::Cover single = cech::Cover::build(b.cover.ambient, {b.cover.ambient});
    cech::DeligneCocycle cprime = cech::DeligneCocycle::trivial(single, b.trivialization->omega);
    auto bEp = quantomorph::GerbeButterfly::build_E(single, cprime, P, ctx);
    auto bE = quantomorph::GerbeButterfly::build_E(b.cover, b.deligne, P, ctx);
    Report iso = quantomorph::two_iso_phi(bEp, bQ, bE, ctx, 30, "acc8.iso");

    double worst = std::max(repQ.worst_residual(), iso.worst_residual());
    line(8, repQ.all_ok() && iso.all_ok() && worst <= ctx.tol,
         "trivialization butterfly and its canonical 2-isomorphism", worst);
}

void criterion_9(const VerifyCtx& ctx) {
    Box M = box3();
    Form omega(2, M);
    omega.add_term({1, 2}, Expr::var("x"));
    gerbevf::TrivGerbeModel W{M, omega, ctx};
    plectic::PlecticManifold P{M, cartan::exterior_d(omega)};
    plectic::PlecticModel L{&P, ctx};

    lie2::Morphism<gerbevf::TrivGerbeModel, plectic::PlecticModel> F;
    F.F0 = [&](const gerbevf::TrivPair& x) {
        return plectic::HamPair{x.xi, cartan::interior(x.xi, omega) - x.A};
    };
    F.F1 = [](const Expr& f) { return f; };
    F.F2 = [&](const gerbevf::TrivPair& x, const gerbevf::TrivPair& y) {
        Expr val = cartan::interior(y.xi, x.A).scalar() - cartan::interior(x.xi, y.A).scalar() -
                   cartan::interior(y.xi, cartan::interior(x.xi, omega)).scalar();
        return val.normalized();
    };

    auto hams = plectic::sample_ham_pairs(P, 4, ctx.seed, "acc9");
    std::vector<gerbevf::TrivPair> e0;
    for (const auto& h : hams) e0.push_back(W.from_ham(h));
    std::vector<Expr> e1{Expr::var("x"), (Expr::var("y") * Expr::var("z")).normalized()};
    Report rep = lie2::check_morphism(W, L, F, e0, e1, ctx, "acc9");
    line(9, rep.all_ok() && rep.worst_residual() <= ctx.tol,
         "trivial-gerbe quasi-isomorphism onto the Poisson Lie 2-algebra", rep.worst_residual());
}

void criterion_10(const VerifyCtx& base_ctx) {
    VerifyCtx ctx = base_ctx;
    ctx.samples = 20;
    Box M{{"x", "y"}, {-2, -2}, {2, 2}};
    Form omega(2, M);
    omega.add_term({0, 1}, Expr::constant(1.0));
    Form A = one_form(M, 1, Expr::var("x"));
    double worst = 0;
    for (const char* fs : {"x", "y", "x*y", "3"}) {
        auto lift = quantomorph::kostant_lift(M, omega, A, symexpr::parse_expr(fs), ctx);
        worst = std::max({worst, lift.quantomorphism_residual, lift.connection_pairing_residual});
    }
    line(10, worst <= ctx.tol, "Kostant lifts preserve the connection for x, y, xy, const",
         worst);
}

void criterion_11(const VerifyCtx& ctx) {
    auto b = bundle::load_bundle(fixture("qham_abelian.json"));
    Report good = quantomorph::validate_qham(*b.group_model, *b.qham, ctx);
    bool ok = good.all_ok();
    double show = good.worst_residual();

    quantomorph::QHamData bad = *b.qham;
    Form flipped(2, bad.M);
    flipped.add_term({0, 1}, Expr::constant(1.0)); // dq^dp
    bad.omega = flipped;
    Report r2 = quantomorph::validate_qham(*b.group_model, bad, ctx);
    bool flagged = false;
    for (const auto& c : r2.checks)
        if (c.id.find("moment_condition") != std::string::npos && c.status == Status::Fail &&
            std::abs(c.residual - 2.0) <= 1e-9)
            flagged = true;
    ok = ok && flagged;
    line(11, ok, "abelian quasi-Hamiltonian fixture passes; flipped form fails at scale 2", show);
}

void criterion_12(const VerifyCtx& ctx) {
    auto st = rng::derive(ctx.seed, "acceptance.butterflies");
    bool ok = true;
    std::vector<std::unique_ptr<lie2::FinDimLie2>> keep;
    auto rand_inv = [&]() {
        for (;;) {
            Eigen::MatrixXd P(3, 3);
            for (int i = 0; i < 3; ++i)
                for (int j = 0; j < 3; ++j) P(i, j) = 0.5 * st.uniform_int(-4, 4);
            if (std::abs(P.determinant()) > 0.5) return P;
        }
    };
    for (int round = 0; round < 20; ++round) {
        keep.push_back(std::make_unique<lie2::FinDimLie2>(lie2::FinDimLie2::so3()));
        lie2::FinDimLie2* U = keep.back().get();
        Eigen::MatrixXd P = rand_inv();
        Eigen::MatrixXd Q = rand_inv();
        keep.push_back(std::make_unique<lie2::FinDimLie2>(lie2::FinDimLie2::conjugated(*U, P)));
        lie2::FinDimLie2* V = keep.back().get();
        keep.push_back(std::make_unique<lie2::FinDimLie2>(lie2::FinDimLie2::conjugated(*V, Q)));
        lie2::FinDimLie2* W = keep.back().get();

        lie2::FinDimMorphism fQ{W, V, Q, Eigen::MatrixXd::Zero(0, 0), {}};
        lie2::FinDimMorphism fP{V, U, P, Eigen::MatrixXd::Zero(0, 0), {}};
        lie2::FinDimMorphism fPQ{W, U, P * Q, Eigen::MatrixXd::Zero(0, 0), {}};
        auto comp = lie2::compose_butterflies(lie2::butterfly_of_morphism(fQ),
                                              lie2::butterfly_of_morphism(fP));
        ok = ok && lie2::find_2iso(comp, lie2::butterfly_of_morphism(fPQ), ctx).has_value();

        auto bf = lie2::butterfly_of_morphism(fP);
        auto inv = lie2::compose_butterflies(bf, lie2::flip(bf));
        ok = ok && lie2::find_2iso(inv, lie2::identity_butterfly(*V), ctx).has_value();
    }
    line(12, ok, "finite-dimensional butterfly calculus on 20 random strict instances", 0.0);
}

void criterion_13(const VerifyCtx& ctx) {
    auto b = bundle::load_bundle(fixture("f2.json"));
    Report r1 = bundle::run_suite(b, "all", ctx);
    Report r2 = bundle::run_suite(b, "all", ctx);
    bool ok = r1.text() == r2.text() && r1.structured() == r2.structured() && r1.all_ok();
    line(13, ok, "repeated full-suite runs are byte-identical", r1.worst_residual());
}

} // namespace

int main() {
    VerifyCtx ctx; // 25 samples, 1e-9, seed 0x5EED
    criterion_1(ctx);
    criterion_2(ctx);
    criterion_3(ctx);
    criterion_4(ctx);
    criterion_5(ctx);
    criterion_6(ctx);
    criterion_7(ctx);
    criterion_8(ctx);
    criterion_9(ctx);
    criterion_10(ctx);
    criterion_11(ctx);
    criterion_12(ctx);
    criterion_13(ctx);
    std::printf("%s\n", failures == 0 ? "acceptance: all criteria passed"
                                      : "acceptance: FAILURES present");
    return failures == 0 ? 0 : 1;
}
