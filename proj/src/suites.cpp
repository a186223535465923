#include <algorithm>
#include <memory>

#include "gerbecal/bundle.hpp"

namespace gerbecal::bundle {

using cartan::Form;
using cartan::VectorField;
using symexpr::Expr;

namespace {

// 3-form the Poisson Lie 2-algebra is built over: an explicit plectic_form
// wins, otherwise the glued three-curvature.
plectic::PlecticManifold source_plectic(const GeometryBundle& b, const VerifyCtx& ctx) {
    if (b.plectic_form) return {b.cover.ambient, *b.plectic_form};
    return {b.cover.ambient, cech::three_curvature(b.cover, b.deligne, ctx)};
}

bool ham_sampler_available(const plectic::PlecticManifold& P) {
    if (P.chi.structurally_zero()) return true;
    return P.M.dim() == 3 && P.chi.terms().size() == 1 &&
           P.chi.terms().begin()->first == std::vector<int>{0, 1, 2};
}

void guarded(Report& rep, const std::string& id, const std::function<void()>& body) {
    try {
        body();
    } catch (const std::exception& e) {
        rep.add(CheckResult::fail(id, 1.0, "", e.what()));
    }
}

Report suite_cartan(const GeometryBundle& b, const VerifyCtx& ctx) {
    Report rep;
    rep.suite = "cartan";
    const Box& M = b.cover.ambient;
    auto st = rng::derive(ctx.seed, "suite.cartan");
    const int maxdeg = std::min<int>(3, static_cast<int>(M.dim()));

    double d2 = 0, magic = 0, mixed = 0, leibniz = 0;
    for (int round = 0; round < 10; ++round) {
        for (int deg = 0; deg <= maxdeg - 1; ++deg) {
            Form f = cartan::random_form(st, deg, M, 3);
            d2 = std::max(d2, cartan::form_residual(cartan::exterior_d(cartan::exterior_d(f)), ctx,
                                                    "cartan.d2")
                                  .value);
            VectorField X = cartan::random_vf(st, M, 2);
            VectorField Y = cartan::random_vf(st, M, 2);
            if (deg >= 1) {
                Form m = cartan::lie_derivative(X, f) - cartan::interior(X, cartan::exterior_d(f)) -
                         cartan::exterior_d(cartan::interior(X, f));
                magic = std::max(magic, cartan::form_residual(m, ctx, "cartan.magic").value);
                Form mx = cartan::lie_derivative(X, cartan::interior(Y, f)) -
                          cartan::interior(Y, cartan::lie_derivative(X, f)) -
                          cartan::interior(cartan::vf_bracket(X, Y), f);
                mixed = std::max(mixed, cartan::form_residual(mx, ctx, "cartan.mixed").value);
            }
            Form g = cartan::random_form(st, 1, M, 2);
            double sign = deg % 2 == 0 ? 1.0 : -1.0;
            Form gl = cartan::exterior_d(cartan::wedge(f, g)) -
                      cartan::wedge(cartan::exterior_d(f), g) -
                      sign * cartan::wedge(f, cartan::exterior_d(g));
            leibniz = std::max(leibniz, cartan::form_residual(gl, ctx, "cartan.leibniz").value);
        }
    }
    rep.add(CheckResult::from_residual("cartan.d_squared", d2, ctx.tol));
    rep.add(CheckResult::from_residual("cartan.magic_formula", magic, ctx.tol));
    rep.add(CheckResult::from_residual("cartan.mixed_relation", mixed, ctx.tol));
    rep.add(CheckResult::from_residual("cartan.graded_leibniz", leibniz, ctx.tol));

    if (M.dim() == 3) {
        guarded(rep, "cartan.obstruction_identity", [&] {
            Form B = cartan::exterior_d(cartan::random_form(st, 1, M, 3));
            Form extra(2, M);
            extra.add_term({1, 2}, Expr::var(M.coords[0]));
            B = B + extra;
            VectorField X = cartan::random_divfree_vf(st, M, 2);
            VectorField Y = cartan::random_divfree_vf(st, M, 2);
            VectorField Z = cartan::random_divfree_vf(st, M, 2);
            auto rep2 = cartan::check_appendix_identity(
                B, X, Y, Z, cartan::poincare_primitive(cartan::lie_derivative(X, B)),
                cartan::poincare_primitive(cartan::lie_derivative(Y, B)),
                cartan::poincare_primitive(cartan::lie_derivative(Z, B)), ctx);
            rep.add(CheckResult::from_residual("cartan.obstruction_identity", rep2.residual,
                                               ctx.tol, point_str(rep2.witness)));
        });
    } else {
        rep.add(CheckResult::skip("cartan.obstruction_identity", "needs a 3-dimensional base"));
    }
    rep.sort_by_id();
    return rep;
}

Report suite_deligne(const GeometryBundle& b, const VerifyCtx& ctx) {
    Report rep = cech::validate_deligne(b.cover, b.deligne, ctx);
    rep.suite = "deligne";
    guarded(rep, "deligne.three_curvature", [&] {
        Form chi = cech::three_curvature(b.cover, b.deligne, ctx);
        rep.add(CheckResult::from_residual(
            "deligne.three_curvature_closed",
            cartan::form_residual(cartan::exterior_d(chi), ctx, "suite.chi").value, ctx.tol));
        if (b.plectic_form) {
            rep.add(CheckResult::from_residual(
                "deligne.three_curvature_matches_plectic_form",
                cartan::form_residual(chi - *b.plectic_form, ctx, "suite.chimatch").value,
                ctx.tol));
        }
    });
    if (b.trivialization) {
        Report triv = cech::validate_trivialization(b.cover, b.deligne, *b.trivialization, ctx);
        rep.merge(triv);
    }
    rep.sort_by_id();
    return rep;
}

Report suite_multvf(const GeometryBundle& b, const VerifyCtx& ctx) {
    Report rep;
    rep.suite = "multvf";
    auto st = rng::derive(ctx.seed, "suite.multvf");

    if (b.mult_vf) {
        Report user = gerbevf::validate_multvf(b.cover, b.deligne, b.mult_vf->base, ctx);
        for (auto& c : user.checks) c.id = "multvf.supplied." + c.id;
        rep.merge(user);
        bool has_a = !b.mult_vf->a.parts.empty();
        if (has_a) {
            Report conn = gerbevf::validate_connpres(b.cover, b.deligne, *b.mult_vf, ctx);
            for (auto& c : conn.checks) c.id = "multvf.supplied_conn." + c.id;
            rep.merge(conn);
        }
    }

    guarded(rep, "multvf.horizontal_lift", [&] {
        double lift_ok = 0, fb = 0;
        for (int k = 0; k < 3; ++k) {
            VectorField X = cartan::random_vf(st, b.cover.ambient, 2);
            VectorField Y = cartan::random_vf(st, b.cover.ambient, 2);
            Report r = gerbevf::validate_multvf(b.cover, b.deligne,
                                                gerbevf::horizontal_lift(b.cover, b.deligne, X),
                                                ctx);
            lift_ok = std::max(lift_ok, r.worst_residual());
            fb = std::max(fb, gerbevf::F_B_homotopy_residual(b.cover, b.deligne, X, Y, ctx));
        }
        rep.add(CheckResult::from_residual("multvf.horizontal_lift_valid", lift_ok, ctx.tol));
        rep.add(CheckResult::from_residual("multvf.curving_homotopy", fb, ctx.tol));
    });

    guarded(rep, "multvf.obstruction", [&] {
        VectorField X = cartan::random_vf(st, b.cover.ambient, 2);
        VectorField Y = cartan::random_vf(st, b.cover.ambient, 2);
        VectorField Z = cartan::random_vf(st, b.cover.ambient, 2);
        Report r = gerbevf::morphism_defect_check(b.cover, b.deligne, X, Y, Z, ctx,
                                                  "multvf.obstruction");
        rep.merge(r);
    });
    rep.sort_by_id();
    return rep;
}

Report suite_lie2(const GeometryBundle& b, const VerifyCtx& ctx) {
    Report rep;
    rep.suite = "lie2";

    guarded(rep, "lie2.gerbe_axioms", [&] {
        plectic::PlecticManifold P = source_plectic(b, ctx);
        if (!ham_sampler_available(P)) {
            rep.add(CheckResult::skip("lie2.gerbe_axioms",
                                      "no Hamiltonian sampler for this 3-form shape"));
            return;
        }
        gerbevf::GerbeVfModel m{&b.cover, &b.deligne, ctx};
        std::vector<gerbevf::ConnMultVF> e0;
        for (const auto& h : plectic::sample_ham_pairs(P, 4, ctx.seed, "suite.lie2"))
            e0.push_back(gerbevf::conn_from_ham(b.cover, b.deligne, h));
        auto st = rng::derive(ctx.seed, "suite.lie2.sections");
        std::vector<gerbevf::AlgebroidSection> e1{gerbevf::random_section(b.cover, st),
                                                  gerbevf::random_section(b.cover, st)};
        e0[3] = e0[3] + gerbevf::diff_x(b.cover, e1[0]);
        Report r = lie2::check_lie2_axioms(m, e0, e1, ctx, "lie2.gerbe");
        rep.merge(r);
    });

    if (b.findim_lie2) {
        guarded(rep, "lie2.findim_axioms", [&] {
            lie2::FinDimModel m{&*b.findim_lie2};
            auto st = rng::derive(ctx.seed, "suite.lie2.findim");
            auto e0 = lie2::random_vectors(b.findim_lie2->n0, 4, st);
            auto e1 = lie2::random_vectors(b.findim_lie2->n1, 2, st);
            Report r = lie2::check_lie2_axioms(m, e0, e1, ctx, "lie2.findim");
            rep.merge(r);
        });
    }
    rep.sort_by_id();
    return rep;
}

Report suite_plectic(const GeometryBundle& b, const VerifyCtx& ctx) {
    Report rep;
    rep.suite = "plectic";
    guarded(rep, "plectic.axioms", [&] {
        plectic::PlecticManifold P = source_plectic(b, ctx);
        rep.add(CheckResult::from_residual("plectic.chi_closed", P.closedness_residual(ctx),
                                           ctx.tol));
        if (!ham_sampler_available(P)) {
            rep.add(CheckResult::skip("plectic.axioms",
                                      "no Hamiltonian sampler for this 3-form shape"));
            return;
        }
        plectic::PlecticModel m{&P, ctx};
        auto e0 = plectic::sample_ham_pairs(P, 4, ctx.seed, "suite.plectic");
        double valid = 0;
        for (const auto& h : e0)
            valid = std::max(valid, plectic::validate_ham_pair(P, h, ctx));
        rep.add(CheckResult::from_residual("plectic.sampled_pairs_valid", valid, ctx.tol));
        auto st = rng::derive(ctx.seed, "suite.plectic.fn");
        std::vector<Expr> e1{random_polynomial(st, P.M.coords, 2),
                             random_polynomial(st, P.M.coords, 2)};
        Report r = lie2::check_lie2_axioms(m, e0, e1, ctx, "plectic.lie2");
        rep.merge(r);

        double closure = 0;
        for (std::size_t i = 0; i < e0.size(); ++i)
            for (std::size_t j = 0; j < e0.size(); ++j)
                closure = std::max(closure, plectic::validate_ham_pair(
                                                P, plectic::plectic_bracket(P, e0[i], e0[j]), ctx));
        rep.add(CheckResult::from_residual("plectic.bracket_closure", closure, ctx.tol));
    });
    rep.sort_by_id();
    return rep;
}

Report suite_butterflyE(const GeometryBundle& b, const VerifyCtx& ctx) {
    Report rep;
    rep.suite = "butterflyE";
    guarded(rep, "butterflyE.build", [&] {
        plectic::PlecticManifold P = source_plectic(b, ctx);
        if (!ham_sampler_available(P)) {
            rep.add(CheckResult::skip("butterflyE.build",
                                      "no Hamiltonian sampler for this 3-form shape"));
            return;
        }
        auto bE = quantomorph::GerbeButterfly::build_E(b.cover, b.deligne, P, ctx);
        Report r = check_geometric_butterfly(bE, ctx, "butterflyE", 5);
        rep.merge(r);
    });
    rep.sort_by_id();
    return rep;
}

Report suite_butterflyQ(const GeometryBundle& b, const VerifyCtx& ctx,
                        std::vector<std::unique_ptr<cech::Cover>>& keep_covers,
                        std::vector<std::unique_ptr<cech::DeligneCocycle>>& keep_cocycles) {
    Report rep;
    rep.suite = "butterflyQ";
    if (!b.trivialization) {
        rep.add(CheckResult::skip("butterflyQ.build", "no trivialization in the bundle"));
        return rep;
    }
    guarded(rep, "butterflyQ.build", [&] {
        auto bQ = quantomorph::GerbeButterfly::build_Q(b.cover, b.deligne, *b.trivialization, ctx);
        Report r = check_geometric_butterfly(bQ, ctx, "butterflyQ", 5);
        rep.merge(r);

        plectic::PlecticManifold P = source_plectic(b, ctx);
        if (!ham_sampler_available(P)) {
            rep.add(CheckResult::skip("butterflyQ.two_iso",
                                      "no Hamiltonian sampler for this 3-form shape"));
            return;
        }
        keep_covers.push_back(std::make_unique<cech::Cover>(
            cech::Cover::build(b.cover.ambient, {b.cover.ambient})));
        cech::Cover* single = keep_covers.back().get();
        keep_cocycles.push_back(std::make_unique<cech::DeligneCocycle>(
            cech::DeligneCocycle::trivial(*single, b.trivialization->omega)));
        auto bEp = quantomorph::GerbeButterfly::build_E(*single, *keep_cocycles.back(), P, ctx);
        auto bE = quantomorph::GerbeButterfly::build_E(b.cover, b.deligne, P, ctx);
        Report iso = quantomorph::two_iso_phi(bEp, bQ, bE, ctx, 5, "butterflyQ.two_iso");
        rep.merge(iso);
    });
    rep.sort_by_id();
    return rep;
}

Report suite_qham(const GeometryBundle& b, const VerifyCtx& ctx) {
    Report rep;
    rep.suite = "qham";
    if (!b.group_model || !b.qham) {
        rep.add(CheckResult::skip("qham.validate", "no group model in the bundle"));
        return rep;
    }
    guarded(rep, "qham.validate", [&] {
        rep.merge(b.group_model->validate(ctx));
        rep.merge(quantomorph::validate_qham(*b.group_model, *b.qham, ctx));
    });
    rep.sort_by_id();
    return rep;
}

Report suite_square(const GeometryBundle& b, const VerifyCtx& ctx,
                    std::vector<std::unique_ptr<cech::Cover>>& keep_covers,
                    std::vector<std::unique_ptr<cech::DeligneCocycle>>& keep_cocycles) {
    Report rep;
    rep.suite = "square";
    if (!b.group_model || !b.qham || !b.trivialization) {
        rep.add(CheckResult::skip("square.check",
                                  "needs group_model, qham and trivialization"));
        return rep;
    }
    guarded(rep, "square.check", [&] {
        plectic::PlecticManifold P{b.cover.ambient,
                                   -1.0 * cartan::exterior_d(b.qham->omega)};
        keep_covers.push_back(std::make_unique<cech::Cover>(
            cech::Cover::build(b.cover.ambient, {b.cover.ambient})));
        cech::Cover* single = keep_covers.back().get();
        keep_cocycles.push_back(std::make_unique<cech::DeligneCocycle>(
            cech::DeligneCocycle::trivial(*single, b.trivialization->omega)));
        auto bE_triv =
            quantomorph::GerbeButterfly::build_E(*single, *keep_cocycles.back(), P, ctx);
        auto bE_gerbe = quantomorph::GerbeButterfly::build_E(b.cover, b.deligne, P, ctx);
        auto bQ = quantomorph::GerbeButterfly::build_Q(b.cover, b.deligne, *b.trivialization, ctx);
        Report r = quantomorph::check_square(*b.group_model, *b.qham, bE_triv, bE_gerbe, bQ,
                                             b.moment_map, ctx);
        rep.merge(r);
    });
    rep.sort_by_id();
    return rep;
}

} // namespace

Report run_suite(const GeometryBundle& b, const std::string& suite, const VerifyCtx& ctx) {
    std::vector<std::unique_ptr<cech::Cover>> keep_covers;
    std::vector<std::unique_ptr<cech::DeligneCocycle>> keep_cocycles;

    auto dispatch = [&](const std::string& name) -> Report {
        if (name == "cartan") return suite_cartan(b, ctx);
        if (name == "deligne") return suite_deligne(b, ctx);
        if (name == "multvf") return suite_multvf(b, ctx);
        if (name == "lie2") return suite_lie2(b, ctx);
        if (name == "plectic") return suite_plectic(b, ctx);
        if (name == "butterflyE") return suite_butterflyE(b, ctx);
        if (name == "butterflyQ") return suite_butterflyQ(b, ctx, keep_covers, keep_cocycles);
        if (name == "qham") return suite_qham(b, ctx);
        if (name == "square") return suite_square(b, ctx, keep_covers, keep_cocycles);
        throw UnknownSuite(name);
    };

    if (suite != "all") return dispatch(suite);

    Report all;
    all.suite = "all";
    for (const auto& name : suite_names()) {
        if (name == "all") continue;
        Report r = dispatch(name);
        for (auto& c : r.checks) all.add(c);
    }
    all.sort_by_id();
    return all;
}

} // namespace gerbecal::bundle
