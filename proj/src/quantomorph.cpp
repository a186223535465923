#include "gerbecal/quantomorph.hpp"

#include <Eigen/SVD>
#include <algorithm>

namespace gerbecal::quantomorph {

using cech::cechform_add;
using cech::cechform_scale;
using cech::tuple_str;

EElement EElement::zero(const Cover& cover) {
    return {ConnMultVF::zero(cover), CechForm::zeros(cover, 0, 1)};
}

EElement operator+(const EElement& a, const EElement& b) {
    return {a.v + b.v, cechform_add(a.g, b.g)};
}

EElement operator*(double c, const EElement& a) { return {c * a.v, cechform_scale(c, a.g)}; }

GerbeButterfly GerbeButterfly::build_E(const Cover& cover, const DeligneCocycle& c,
                                       const PlecticManifold& P, const VerifyCtx& ctx) {
    Form chi = cech::three_curvature(cover, c, ctx);
    auto r = cartan::form_residual(chi - P.chi, ctx, "build_E.curvature");
    if (r.value > ctx.tol)
        throw CurvatureMismatch("three-curvature of the cocycle differs from the 3-form at " +
                                point_str(r.witness));
    GerbeButterfly b;
    b.kind_ = Kind::Prequantization;
    b.cover_ = &cover;
    b.coc_ = &c;
    b.plectic_ = P;
    b.ctx = ctx;
    return b;
}

GerbeButterfly GerbeButterfly::build_Q(const Cover& cover, const DeligneCocycle& c,
                                       const Trivialization& t, const VerifyCtx& ctx) {
    Report triv = cech::validate_trivialization(cover, c, t, ctx);
    if (!triv.all_ok()) throw PreconditionFailed("build_Q: trivialization data is invalid");
    GerbeButterfly b;
    b.kind_ = Kind::Trivialization;
    b.cover_ = &cover;
    b.coc_ = &c;
    b.triv_ = &t;
    b.triv_model_ = gerbevf::TrivGerbeModel{cover.ambient, t.omega.with_domain(cover.ambient), ctx};
    b.curvQ_.form_degree = 2;
    b.curvQ_.depth = 1;
    for (const auto& [idx, eta] : t.eta.parts) b.curvQ_.set(idx, cartan::exterior_d(eta));
    b.ctx = ctx;
    return b;
}

EElement GerbeButterfly::kappa(const Expr& h) const {
    EElement e = EElement::zero(*cover_);
    for (const auto& idx : cover_->tuples(1))
        e.g.set(idx, Form::from_scalar(h, cover_->overlap(idx)));
    return e;
}

EElement GerbeButterfly::lambda(const AlgebroidSection& u) const {
    EElement e;
    e.v = gerbevf::diff_x(*cover_, u);
    e.g.form_degree = 0;
    e.g.depth = 1;
    for (const auto& [idx, f] : u.u.parts)
        e.g.set(idx, Form::from_scalar((Expr::constant(-1.0) * f.scalar()).normalized(), f.domain()));
    return e;
}

namespace {

// eps_i = a_i - iota_xi K_i - d g_i, glued over charts.
Form glued_sigma_form(const Cover& cover, const EElement& e, const CechForm& K,
                      const VerifyCtx& ctx, const std::string& context) {
    std::map<int, Form> pieces;
    for (const auto& idx : cover.tuples(1)) {
        const Box& box = cover.overlap(idx);
        VectorField lx(box, e.v.base.xi.components);
        Form p = e.v.a.at(idx) - cartan::exterior_d(e.g.at(idx));
        if (K.has(idx) && !K.at(idx).structurally_zero()) p = p - cartan::interior(lx, K.at(idx));
        pieces[idx[0]] = p;
    }
    return cech::glue_chart_forms(cover, pieces, ctx, context);
}

} // namespace

HamPair GerbeButterfly::sigma_E(const EElement& e) const {
    Form eps = glued_sigma_form(*cover_, e, coc_->B, ctx, "sigma_E");
    return {e.v.base.xi, -1.0 * eps};
}

TrivPair GerbeButterfly::sigma_Q(const EElement& e) const {
    Form A = glued_sigma_form(*cover_, e, curvQ_, ctx, "sigma_Q");
    return {e.v.base.xi, A};
}

EElement GerbeButterfly::bracket(const EElement& a, const EElement& b) const {
    EElement out;
    out.v = gerbevf::bracket00(*cover_, a.v, b.v);
    out.g.form_degree = 0;
    out.g.depth = 1;
    for (const auto& idx : cover_->tuples(1)) {
        const Box& box = cover_->overlap(idx);
        VectorField lx(box, a.v.base.xi.components);
        VectorField lz(box, b.v.base.xi.components);
        Expr val;
        if (kind_ == Kind::Prequantization) {
            // iota_xi b_i - iota_zeta a_i + iota_zeta iota_xi B_i
            val = cartan::interior(lx, b.v.a.at(idx)).scalar() -
                  cartan::interior(lz, a.v.a.at(idx)).scalar() +
                  cartan::interior(lz, cartan::interior(lx, coc_->B.at(idx))).scalar();
        } else {
            // L_xi h_i - L_zeta g_i + iota_xi iota_zeta curv_i
            val = lx.apply(b.g.at(idx).scalar()) - lz.apply(a.g.at(idx).scalar());
            if (!curvQ_.at(idx).structurally_zero())
                val = val +
                      cartan::interior(lx, cartan::interior(lz, curvQ_.at(idx))).scalar();
        }
        out.g.set(idx, Form::from_scalar(val.normalized(), box));
    }
    return out;
}

EElement GerbeButterfly::sigma_section(const HamPair& h) const {
    if (kind_ != Kind::Prequantization)
        throw PreconditionFailed("sigma_section applies to the prequantization flavour");
    EElement e;
    e.v = gerbevf::conn_from_ham(*cover_, *coc_, h);
    e.g = CechForm::zeros(*cover_, 0, 1);
    return e;
}

EElement GerbeButterfly::sigma_section_w(const TrivPair& w) const {
    if (kind_ != Kind::Trivialization)
        throw PreconditionFailed("sigma_section_w applies to the trivialization flavour");
    EElement e;
    e.v.base = gerbevf::horizontal_lift(*cover_, *coc_, w.xi);
    e.v.a.form_degree = 1;
    e.v.a.depth = 1;
    for (const auto& idx : cover_->tuples(1)) {
        const Box& box = cover_->overlap(idx);
        VectorField lx(box, w.xi.components);
        Form a = w.A.with_domain(box);
        if (!curvQ_.at(idx).structurally_zero()) a = a + cartan::interior(lx, curvQ_.at(idx));
        e.v.a.set(idx, a);
    }
    e.g = CechForm::zeros(*cover_, 0, 1);
    return e;
}

AlgebroidSection GerbeButterfly::lambda_kernel_witness(const EElement& e, double* residual) const {
    // sigma(e) = 0 requires a vanishing base field and eps = 0
    double base = cartan::vf_residual(e.v.base.xi, ctx, "kernel.base").value;
    if (base > ctx.tol) throw NotInKernel("element has a nonzero base field");
    const CechForm& K = kind_ == Kind::Prequantization ? coc_->B : curvQ_;
    Form eps = glued_sigma_form(*cover_, e, K, ctx, "kernel.sigma");
    double sig = cartan::form_residual(eps, ctx, "kernel.sigma_value").value;
    if (sig > ctx.tol) throw NotInKernel("element has a nonzero sigma image");

    AlgebroidSection u;
    u.u.form_degree = 0;
    u.u.depth = 1;
    for (const auto& [idx, g] : e.g.parts)
        u.u.set(idx,
                Form::from_scalar((Expr::constant(-1.0) * g.scalar()).normalized(), g.domain()));

    if (residual) {
        EElement back = lambda(u);
        double worst = 0.0;
        for (const auto& [idx, g] : e.g.parts) {
            Form diff = back.g.at(idx) - g;
            worst = std::max(worst, cartan::form_residual(diff, ctx, "kernel.g").value);
        }
        for (const auto& [idx, f] : e.v.base.f.parts) {
            Form diff = back.v.base.f.at(idx) - f;
            worst = std::max(worst, cartan::form_residual(diff, ctx, "kernel.f").value);
        }
        for (const auto& [idx, a] : e.v.a.parts) {
            Form diff = back.v.a.at(idx) - a;
            worst = std::max(worst, cartan::form_residual(diff, ctx, "kernel.a").value);
        }
        *residual = worst;
    }
    return u;
}

double GerbeButterfly::carrier_residual(const EElement& e, const std::string& label) const {
    double worst = 0.0;
    for (const auto& idx : cover_->tuples(2)) {
        const Box& box = cover_->overlap(idx);
        VectorField lx(box, e.v.base.xi.components);
        Expr resid = e.g.at({idx[1]}).scalar() - e.g.at({idx[0]}).scalar() -
                     cartan::interior(lx, coc_->A.at(idx)).scalar() -
                     e.v.base.f.at(idx).scalar();
        worst = std::max(
            worst, sampled_max_abs({resid.normalized()}, box, ctx, label + tuple_str(idx)).value);
    }
    return worst;
}

double GerbeButterfly::element_residual(const EElement& e, const std::string& label) const {
    Report conn = gerbevf::validate_connpres(*cover_, *coc_, e.v, ctx);
    double worst = conn.worst_residual();
    if (!conn.all_ok()) worst = std::max(worst, 1.0);
    return std::max(worst, carrier_residual(e, label));
}

EElement GerbeButterfly::sample_element(rng::Stream& st, const std::string& tag) const {
    EElement e = EElement::zero(*cover_);
    if (kind_ == Kind::Prequantization) {
        auto hams = plectic::sample_ham_pairs(plectic_, 1, st.next_u64(), tag);
        e = sigma_section(hams[0]);
    } else {
        auto hams = plectic::sample_ham_pairs(
            PlecticManifold{cover_->ambient, cartan::exterior_d(triv_model_.omega)}, 1,
            st.next_u64(), tag);
        e = sigma_section_w(triv_model_.from_ham(hams[0]));
    }
    e = e + lambda(gerbevf::random_section(*cover_, st));
    e = e + kappa(random_polynomial(st, cover_->ambient.coords, 2));
    return e;
}

namespace {

double hampair_residual(const HamPair& h, const VerifyCtx& ctx, const std::string& label) {
    double r = cartan::vf_residual(h.xi, ctx, label + ".xi").value;
    return std::max(r, cartan::form_residual(h.beta, ctx, label + ".beta").value);
}

double trivpair_residual(const TrivPair& w, const VerifyCtx& ctx, const std::string& label) {
    double r = cartan::vf_residual(w.xi, ctx, label + ".xi").value;
    return std::max(r, cartan::form_residual(w.A, ctx, label + ".A").value);
}

double eelement_diff_residual(const GerbeButterfly& b, const EElement& x, const EElement& y,
                              const VerifyCtx& ctx, const std::string& label) {
    EElement d = x + -1.0 * y;
    double worst = cartan::vf_residual(d.v.base.xi, ctx, label + ".xi").value;
    for (const auto& [idx, f] : d.v.base.f.parts)
        worst = std::max(worst, cartan::form_residual(f, ctx, label + ".f").value);
    for (const auto& [idx, a] : d.v.a.parts)
        worst = std::max(worst, cartan::form_residual(a, ctx, label + ".a").value);
    for (const auto& [idx, g] : d.g.parts)
        worst = std::max(worst, cartan::form_residual(g, ctx, label + ".g").value);
    (void)b;
    return worst;
}

} // namespace

Report check_geometric_butterfly(const GerbeButterfly& b, const VerifyCtx& ctx,
                                 const std::string& prefix, int samples) {
    Report rep;
    rep.suite = prefix;
    const Cover& cover = b.cover();
    auto st = rng::derive(ctx.seed, prefix + ".samples");

    const bool preq = b.kind() == GerbeButterfly::Kind::Prequantization;
    PlecticManifold source =
        preq ? b.plectic()
             : PlecticManifold{cover.ambient, cartan::exterior_d(b.triv_model().omega)};

    // carrier validity of sampled elements
    double carrier = 0.0;
    std::vector<EElement> elems;
    for (int k = 0; k < samples; ++k) {
        EElement e = b.sample_element(st, prefix + ".elt" + std::to_string(k));
        carrier = std::max(carrier, b.element_residual(e, prefix + ".carrier"));
        elems.push_back(std::move(e));
    }
    rep.add(CheckResult::from_residual(prefix + ".carrier_constraint", carrier, ctx.tol));

    // wings: sigma(kappa(h)) = d h, rho(lambda(u)) = d u, rho(kappa) = 0,
    // sigma(lambda) = 0
    double sk = 0, rl = 0, rk = 0, sl = 0;
    for (int k = 0; k < 3; ++k) {
        Expr h = random_polynomial(st, cover.ambient.coords, 2);
        EElement kh = b.kappa(h);
        rk = std::max(rk, gerbevf::connmultvf_residual(cover, b.rho(kh), ctx, prefix + ".rk"));
        if (preq) {
            HamPair s = b.sigma_E(kh);
            HamPair want = plectic::plectic_d(source, h);
            sk = std::max(sk, hampair_residual(s + -1.0 * want, ctx, prefix + ".sk"));
        } else {
            TrivPair s = b.sigma_Q(kh);
            TrivPair want = b.triv_model().d(h);
            sk = std::max(sk, trivpair_residual(s + -1.0 * want, ctx, prefix + ".sk"));
        }

        AlgebroidSection u = gerbevf::random_section(cover, st);
        EElement lu = b.lambda(u);
        ConnMultVF du = gerbevf::diff_x(cover, u);
        rl = std::max(rl, gerbevf::connmultvf_residual(cover, b.rho(lu) + -1.0 * du, ctx,
                                                       prefix + ".rl"));
        if (preq) {
            sl = std::max(sl, hampair_residual(b.sigma_E(lu), ctx, prefix + ".sl"));
        } else {
            sl = std::max(sl, trivpair_residual(b.sigma_Q(lu), ctx, prefix + ".sl"));
        }
    }
    rep.add(CheckResult::from_residual(prefix + ".sigma_kappa_is_d", sk, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".rho_lambda_is_d", rl, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".rho_kappa_zero", rk, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".sigma_lambda_zero", sl, ctx.tol));

    // bullet 2: sigma and rho preserve brackets
    double sbr = 0, rbr = 0;
    for (std::size_t i = 0; i < elems.size(); ++i)
        for (std::size_t j = i + 1; j < elems.size(); ++j) {
            EElement br = b.bracket(elems[i], elems[j]);
            ConnMultVF want_rho = gerbevf::bracket00(cover, b.rho(elems[i]), b.rho(elems[j]));
            rbr = std::max(rbr, gerbevf::connmultvf_residual(cover, b.rho(br) + -1.0 * want_rho,
                                                             ctx, prefix + ".rbr"));
            if (preq) {
                HamPair lhs = b.sigma_E(br);
                HamPair rhs = plectic::plectic_bracket(source, b.sigma_E(elems[i]),
                                                       b.sigma_E(elems[j]));
                sbr = std::max(sbr, hampair_residual(lhs + -1.0 * rhs, ctx, prefix + ".sbr"));
            } else {
                TrivPair lhs = b.sigma_Q(br);
                TrivPair rhs = b.triv_model().b00(b.sigma_Q(elems[i]), b.sigma_Q(elems[j]));
                sbr = std::max(sbr, trivpair_residual(lhs + -1.0 * rhs, ctx, prefix + ".sbr"));
            }
        }
    rep.add(CheckResult::from_residual(prefix + ".sigma_preserves_bracket", sbr, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".rho_preserves_bracket", rbr, ctx.tol));

    // bullet 3: equivariance of the wings
    double wing_l = 0, wing_k = 0;
    for (std::size_t i = 0; i < elems.size() && i < 3; ++i) {
        AlgebroidSection u = gerbevf::random_section(cover, st);
        EElement lhs = b.bracket(elems[i], b.lambda(u));
        EElement rhs = b.lambda(gerbevf::bracket01(cover, b.rho(elems[i]), u));
        wing_l = std::max(wing_l, eelement_diff_residual(b, lhs, rhs, ctx, prefix + ".wl"));

        Expr h = random_polynomial(st, cover.ambient.coords, 2);
        EElement lhs2 = b.bracket(elems[i], b.kappa(h));
        // mixed brackets vanish in the Poisson Lie 2-algebra; in the
        // trivial-gerbe instance [x, f] = xi(f)
        EElement rhs2 = preq ? EElement::zero(cover)
                             : b.kappa(b.triv_model().b01(b.sigma_Q(elems[i]), h));
        wing_k = std::max(wing_k, eelement_diff_residual(b, lhs2, rhs2, ctx, prefix + ".wk"));
    }
    rep.add(CheckResult::from_residual(prefix + ".lambda_equivariance", wing_l, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".kappa_equivariance", wing_k, ctx.tol));

    // bullet 4: Jacobiator transport (target side strict)
    double jac = 0;
    for (std::size_t i = 0; i + 2 < elems.size(); ++i) {
        const EElement& x = elems[i];
        const EElement& y = elems[i + 1];
        const EElement& z = elems[i + 2];
        EElement cyc = b.bracket(x, b.bracket(y, z)) + b.bracket(y, b.bracket(z, x)) +
                       b.bracket(z, b.bracket(x, y));
        EElement lhs;
        if (preq) {
            Expr j = plectic::plectic_jacobiator(source, b.sigma_E(x), b.sigma_E(y), b.sigma_E(z));
            lhs = b.kappa(j);
        } else {
            lhs = EElement::zero(cover); // both sides strict
        }
        jac = std::max(jac, eelement_diff_residual(b, lhs, cyc, ctx, prefix + ".jac"));
    }
    rep.add(CheckResult::from_residual(prefix + ".jacobiator_transport", jac, ctx.tol));

    // exactness witnesses
    double surj = 0;
    for (int k = 0; k < 3; ++k) {
        if (preq) {
            HamPair h = plectic::sample_ham_pairs(source, 1, st.next_u64(), prefix + ".surj")[0];
            HamPair back = b.sigma_E(b.sigma_section(h));
            surj = std::max(surj, hampair_residual(back + -1.0 * h, ctx, prefix + ".surj"));
        } else {
            auto hams = plectic::sample_ham_pairs(source, 1, st.next_u64(), prefix + ".surjq");
            TrivPair w = b.triv_model().from_ham(hams[0]);
            TrivPair back = b.sigma_Q(b.sigma_section_w(w));
            surj = std::max(surj, trivpair_residual(back + -1.0 * w, ctx, prefix + ".surj"));
        }
    }
    rep.add(CheckResult::from_residual(prefix + ".sigma_section_roundtrip", surj, ctx.tol));

    // lambda injectivity: the degree-1 datum is recovered from lambda(u)
    double inj = 0;
    for (int k = 0; k < 3; ++k) {
        AlgebroidSection u = gerbevf::random_section(cover, st);
        EElement lu = b.lambda(u);
        double r = 0;
        AlgebroidSection back = b.lambda_kernel_witness(lu, &r);
        inj = std::max(inj, r);
        for (const auto& [idx, f] : u.u.parts) {
            Form diff = back.u.at(idx) - f;
            inj = std::max(inj, cartan::form_residual(diff, ctx, prefix + ".inj").value);
        }
    }
    rep.add(CheckResult::from_residual(prefix + ".lambda_injectivity", inj, ctx.tol));

    // exactness at the carrier: kernel elements are lambda images up to kappa
    double ker = 0;
    for (int k = 0; k < 3; ++k) {
        AlgebroidSection u = gerbevf::random_section(cover, st);
        double cshift = st.uniform(-2, 2);
        EElement e = b.lambda(u) + b.kappa(Expr::constant(cshift));
        double r = 0;
        AlgebroidSection w = b.lambda_kernel_witness(e, &r);
        ker = std::max(ker, r);
        // ambiguity is exactly a glued function: witness - u is constant here
        Expr diff0 = (w.u.at({0}).scalar() - u.u.at({0}).scalar() + Expr::constant(cshift));
        ker = std::max(
            ker, sampled_max_abs({diff0.normalized()}, cover.charts[0], ctx, prefix + ".ker").value);
    }
    rep.add(CheckResult::from_residual(prefix + ".kernel_witness", ker, ctx.tol));

    rep.sort_by_id();
    return rep;
}

Report two_iso_phi(const GerbeButterfly& bE_triv, const GerbeButterfly& bQ,
                   const GerbeButterfly& bE, const VerifyCtx& ctx, int samples,
                   const std::string& prefix) {
    Report rep;
    rep.suite = prefix;
    const Cover& cover = bQ.cover();
    const Cover& single = bE_triv.cover();
    auto st = rng::derive(ctx.seed, prefix + ".samples");

    struct CompositeElt {
        EElement eprime; // over the single-chart trivial presentation
        EElement e;      // over the gerbe cover
    };

    // pair (e', e) with rho(e') = sigma_Q(e), sampled constructively
    auto sample_composite = [&](const std::string& tag) {
        CompositeElt c;
        c.e = bQ.sample_element(st, tag);
        TrivPair w = bQ.sigma_Q(c.e);
        c.eprime = EElement::zero(single);
        c.eprime.v.base.xi = w.xi;
        c.eprime.v.a.set({0}, w.A.with_domain(single.charts[0]));
        c.eprime.g.set({0}, Form::from_scalar(random_polynomial(st, single.ambient.coords, 2),
                                              single.charts[0]));
        return c;
    };

    auto phi = [&](const CompositeElt& c) {
        EElement out = c.e;
        Expr f = c.eprime.g.at({0}).scalar();
        for (const auto& idx : cover.tuples(1)) {
            Form g = out.g.at(idx);
            out.g.parts[idx] = Form::from_scalar((g.scalar() + f).normalized(), g.domain());
        }
        return out;
    };

    std::vector<CompositeElt> elts;
    for (int k = 0; k < samples; ++k) elts.push_back(sample_composite("composite" + std::to_string(k)));

    // pairing consistency of the samples; rho on the trivial presentation
    // forgets g, keeping (xi, a1)
    double pair_ok = 0;
    for (const auto& c : elts) {
        TrivPair rho_ep{c.eprime.v.base.xi, c.eprime.v.a.at({0}).with_domain(single.ambient)};
        TrivPair sq = bQ.sigma_Q(c.e);
        pair_ok = std::max(pair_ok, trivpair_residual(rho_ep + -1.0 * sq, ctx, prefix + ".pair"));
    }
    rep.add(CheckResult::from_residual(prefix + ".fibre_condition", pair_ok, ctx.tol));

    // quotient invariance: shifting by the middle degree-1 space fixes the image
    double quot = 0;
    for (const auto& c : elts) {
        Expr w = random_polynomial(st, cover.ambient.coords, 2);
        CompositeElt shifted = c;
        AlgebroidSection ws;
        ws.u.form_degree = 0;
        ws.u.depth = 1;
        ws.u.set({0}, Form::from_scalar(w, single.charts[0]));
        shifted.eprime = shifted.eprime + bE_triv.lambda(ws);
        shifted.e = shifted.e + bQ.kappa(w);
        quot = std::max(quot, eelement_diff_residual(bE, phi(shifted), phi(c), ctx,
                                                     prefix + ".quot"));
    }
    rep.add(CheckResult::from_residual(prefix + ".quotient_invariance", quot, ctx.tol));

    // structure maps
    double mk = 0, ml = 0, ms = 0, mr = 0;
    for (int k = 0; k < 3; ++k) {
        Expr h = random_polynomial(st, cover.ambient.coords, 2);
        CompositeElt ck;
        ck.eprime = bE_triv.kappa(h);
        ck.e = EElement::zero(cover);
        mk = std::max(mk, eelement_diff_residual(bE, phi(ck), bE.kappa(h), ctx, prefix + ".mk"));

        AlgebroidSection u = gerbevf::random_section(cover, st);
        CompositeElt cl;
        cl.eprime = EElement::zero(single);
        cl.e = bQ.lambda(u);
        ml = std::max(ml, eelement_diff_residual(bE, phi(cl), bE.lambda(u), ctx, prefix + ".ml"));
    }
    for (const auto& c : elts) {
        HamPair lhs = bE.sigma_E(phi(c));
        HamPair rhs = bE_triv.sigma_E(c.eprime);
        ms = std::max(ms, hampair_residual(lhs + -1.0 * rhs, ctx, prefix + ".ms"));
        ConnMultVF dr = bE.rho(phi(c)) + -1.0 * bQ.rho(c.e);
        mr = std::max(mr, gerbevf::connmultvf_residual(cover, dr, ctx, prefix + ".mr"));
    }
    rep.add(CheckResult::from_residual(prefix + ".kappa_commutes", mk, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".lambda_commutes", ml, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".sigma_commutes", ms, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".rho_commutes", mr, ctx.tol));

    // bracket commutation on sampled pairs
    double br = 0;
    for (std::size_t i = 0; i < elts.size(); ++i)
        for (std::size_t j = i + 1; j < elts.size(); ++j) {
            CompositeElt prod;
            prod.eprime = bE_triv.bracket(elts[i].eprime, elts[j].eprime);
            prod.e = bQ.bracket(elts[i].e, elts[j].e);
            EElement lhs = phi(prod);
            EElement rhs = bE.bracket(phi(elts[i]), phi(elts[j]));
            br = std::max(br, eelement_diff_residual(bE, lhs, rhs, ctx, prefix + ".br"));
        }
    rep.add(CheckResult::from_residual(prefix + ".bracket_commutes", br, ctx.tol));

    rep.sort_by_id();
    return rep;
}

// ---------------------------------------------------------------------------

namespace {

Expr det_expr(const std::vector<std::vector<Expr>>& m) {
    const std::size_t n = m.size();
    if (n == 1) return m[0][0];
    if (n == 2) return (m[0][0] * m[1][1] - m[0][1] * m[1][0]).normalized();
    Expr det;
    for (std::size_t j = 0; j < n; ++j) {
        std::vector<std::vector<Expr>> sub;
        for (std::size_t r = 1; r < n; ++r) {
            std::vector<Expr> row;
            for (std::size_t c = 0; c < n; ++c)
                if (c != j) row.push_back(m[r][c]);
            sub.push_back(std::move(row));
        }
        Expr term = m[0][j] * det_expr(sub);
        det = (j % 2 == 0) ? det + term : det - term;
    }
    return det.normalized();
}

} // namespace

KostantLift kostant_lift(const Box& M, const Form& omega, const Form& A, const Expr& f,
                         const VerifyCtx& ctx) {
    {
        Form resid = cartan::exterior_d(A) - omega;
        auto r = cartan::form_residual(resid, ctx, "kostant.dA");
        if (r.value > ctx.tol) throw PreconditionFailed("kostant_lift: dA = omega");
    }
    const std::size_t n = M.dim();
    if (n > 3) throw DimensionMismatch("kostant_lift supports dimension <= 3");

    // omega(d_a, d_b) matrix and the solve sum_a W(a,b) X^a = -d_b f
    std::vector<std::vector<Expr>> W(n, std::vector<Expr>(n));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) {
            if (a == b) continue;
            std::vector<int> idx{static_cast<int>(std::min(a, b)), static_cast<int>(std::max(a, b))};
            Expr c = omega.coefficient(idx);
            W[a][b] = (a < b) ? c : (Expr::constant(-1.0) * c).normalized();
        }
    // transpose system: rows indexed by b
    std::vector<std::vector<Expr>> Wt(n, std::vector<Expr>(n));
    for (std::size_t a = 0; a < n; ++a)
        for (std::size_t b = 0; b < n; ++b) Wt[b][a] = W[a][b];

    Expr det = det_expr(Wt);
    double dmin = 1e300;
    for (const auto& p : sample_points(M, ctx.samples, ctx.seed, "kostant.det"))
        dmin = std::min(dmin, std::abs(det.eval(p)));
    if (dmin <= 1e-9) throw NoHamiltonianField("omega degenerates on the sampled fixture");

    std::vector<Expr> rhs(n);
    for (std::size_t b = 0; b < n; ++b) rhs[b] = (Expr::constant(-1.0) * f.diff(M.coords[b])).normalized();

    VectorField X(M);
    for (std::size_t a = 0; a < n; ++a) {
        std::vector<std::vector<Expr>> Wa = Wt;
        for (std::size_t b = 0; b < n; ++b) Wa[b][a] = rhs[b];
        X.components[a] = (det_expr(Wa) / det).normalized();
    }

    KostantLift out;
    out.hamiltonian_field = X;
    out.vertical = (f - cartan::interior(X, A).scalar()).normalized();

    // iota_X gamma = iota_X A + vertical = f by construction; evaluate anyway
    Expr pairing = (cartan::interior(X, A).scalar() + out.vertical - f).normalized();
    out.connection_pairing_residual =
        pairing.is_zero() ? 0.0 : sampled_max_abs({pairing}, M, ctx, "kostant.pairing").value;

    // L_X gamma = iota_X omega + d(iota_X gamma) = iota_X omega + df
    Form lie = cartan::interior(X, omega) + cartan::exterior_d(Form::from_scalar(f, M));
    out.quantomorphism_residual = cartan::form_residual(lie, ctx, "kostant.lie").value;
    return out;
}

// ---------------------------------------------------------------------------

Report GroupModel::validate(const VerifyCtx& ctx) const {
    Report rep;
    rep.suite = "group_model";
    rep.add(CheckResult::from_residual(
        "group.cartan_form_closed",
        cartan::form_residual(cartan::exterior_d(eta), ctx, "group.deta").value, ctx.tol));
    double sym = (inner - inner.transpose()).cwiseAbs().maxCoeff();
    rep.add(CheckResult::from_residual("group.inner_symmetric", sym, ctx.tol));
    if (!structure.empty()) {
        // <[x,y],z> + <y,[x,z]> = 0 on basis triples
        const int d = dim();
        double worst = 0;
        for (int x = 0; x < d; ++x)
            for (int y = 0; y < d; ++y)
                for (int z = 0; z < d; ++z) {
                    double t1 = 0, t2 = 0;
                    for (int i = 0; i < d; ++i) {
                        t1 += structure[static_cast<std::size_t>(i)](x, y) * inner(i, z);
                        t2 += inner(y, i) * structure[static_cast<std::size_t>(i)](x, z);
                    }
                    worst = std::max(worst, std::abs(t1 + t2));
                }
        rep.add(CheckResult::from_residual("group.inner_invariant", worst, ctx.tol));
    }
    rep.sort_by_id();
    return rep;
}

Form pullback(const Form& f, const std::vector<Expr>& map, const Box& target) {
    if (map.size() != f.domain().dim())
        throw DimensionMismatch("pullback: component count differs from source dimension");
    std::map<std::string, Expr> subst;
    for (std::size_t i = 0; i < map.size(); ++i) subst[f.domain().coords[i]] = map[i];

    std::vector<Form> dmap; // dPhi_a as 1-forms on the target
    for (std::size_t a = 0; a < map.size(); ++a) {
        Form da(1, target);
        for (std::size_t i = 0; i < target.dim(); ++i) {
            Expr c = map[a].diff(target.coords[i]).normalized();
            if (!c.is_zero()) da.add_term({static_cast<int>(i)}, c);
        }
        dmap.push_back(std::move(da));
    }

    Form out(f.degree(), target);
    for (const auto& [idx, coef] : f.terms()) {
        Form term = Form::from_scalar(coef.substituted(subst).normalized(), target);
        Form wedge_part(0, target);
        bool first = true;
        for (int a : idx) {
            wedge_part = first ? dmap[static_cast<std::size_t>(a)]
                               : cartan::wedge(wedge_part, dmap[static_cast<std::size_t>(a)]);
            first = false;
        }
        if (idx.empty()) {
            out = out + term;
        } else {
            out = out + cartan::wedge(term, wedge_part);
        }
    }
    return out;
}

Report validate_qham(const GroupModel& G, const QHamData& D, const VerifyCtx& ctx) {
    Report rep;
    rep.suite = "qham";

    // (i) d omega + Phi* eta = 0
    Form resid_i = cartan::exterior_d(D.omega) + pullback(G.eta, D.moment, D.M);
    auto ri = cartan::form_residual(resid_i, ctx, "qham.i");
    rep.add(CheckResult::from_residual("qham.curvature_matching", ri.value, ctx.tol,
                                       point_str(ri.witness)));

    // (ii) per basis direction
    const int dg = G.dim();
    for (int a = 0; a < dg; ++a) {
        Form pairing(1, G.patch);
        for (int b = 0; b < dg; ++b) {
            double k = G.inner(b, a);
            if (k == 0.0) continue;
            pairing = pairing + k * (G.theta_left[static_cast<std::size_t>(b)] +
                                     G.theta_right[static_cast<std::size_t>(b)]);
        }
        Form resid = cartan::interior(D.generators[static_cast<std::size_t>(a)], D.omega) +
                     0.5 * pullback(pairing, D.moment, D.M);
        auto r = cartan::form_residual(resid, ctx, "qham.ii." + std::to_string(a));
        rep.add(CheckResult::from_residual("qham.moment_condition." + std::to_string(a + 1),
                                           r.value, ctx.tol, point_str(r.witness)));
    }

    // (iii) ker omega_x \cap ker dPhi_x = 0 at sample points
    {
        const std::size_t n = D.M.dim();
        auto pts = sample_points(D.M, ctx.samples, ctx.seed, "qham.iii");
        double min_gap = 1e300;
        for (const auto& p : pts) {
            Eigen::MatrixXd S(n + D.moment.size(), n);
            S.setZero();
            for (std::size_t a = 0; a < n; ++a)
                for (std::size_t b = 0; b < n; ++b) {
                    if (a == b) continue;
                    std::vector<int> idx{static_cast<int>(std::min(a, b)),
                                         static_cast<int>(std::max(a, b))};
                    double w = D.omega.coefficient(idx).eval(p);
                    S(static_cast<long>(b), static_cast<long>(a)) = (a < b) ? w : -w;
                }
            for (std::size_t m = 0; m < D.moment.size(); ++m)
                for (std::size_t i = 0; i < n; ++i)
                    S(static_cast<long>(n + m), static_cast<long>(i)) =
                        D.moment[m].diff(D.M.coords[i]).eval(p);
            Eigen::JacobiSVD<Eigen::MatrixXd> svd(S);
            min_gap = std::min(min_gap, svd.singularValues().minCoeff());
        }
        bool ok = min_gap > 1e-9;
        CheckResult c = ok ? CheckResult::pass("qham.minimal_degeneracy", 0.0)
                           : CheckResult::fail("qham.minimal_degeneracy", 1.0);
        c.note = "smallest stacked singular value " + std::to_string(min_gap);
        rep.add(c);
    }
    rep.sort_by_id();
    return rep;
}

Report check_square(const GroupModel& G, const QHamData& D, const GerbeButterfly& bE_triv,
                    const GerbeButterfly& bE_gerbe, const GerbeButterfly& bQ,
                    const std::vector<HamPair>& moment_pairs, const VerifyCtx& ctx) {
    // precondition: -d omega = Phi* eta on samples
    Form diff = -1.0 * cartan::exterior_d(D.omega) - pullback(G.eta, D.moment, D.M);
    auto r = cartan::form_residual(diff, ctx, "square.pre");
    if (r.value > ctx.tol)
        throw PreconditionFailed("-d omega = Phi* eta (the two 3-forms differ at " +
                                 point_str(r.witness) + ")");

    Report rep = two_iso_phi(bE_triv, bQ, bE_gerbe, ctx, 6, "square");

    if (!moment_pairs.empty()) {
        const PlecticManifold& L = bE_gerbe.plectic();
        // moment map bracket compatibility against the structure constants
        double mm = 0;
        const int dg = G.dim();
        for (int a = 0; a < dg; ++a)
            for (int b = 0; b < dg; ++b) {
                HamPair lhs = plectic::plectic_bracket(L, moment_pairs[static_cast<std::size_t>(a)],
                                                       moment_pairs[static_cast<std::size_t>(b)]);
                HamPair rhs = HamPair::zero(D.M);
                if (!G.structure.empty()) {
                    for (int i = 0; i < dg; ++i) {
                        double c = G.structure[static_cast<std::size_t>(i)](a, b);
                        if (c != 0.0)
                            rhs = rhs + c * moment_pairs[static_cast<std::size_t>(i)];
                    }
                }
                mm = std::max(mm, hampair_residual(lhs + -1.0 * rhs, ctx, "square.moment"));
            }
        rep.add(CheckResult::from_residual("square.moment_map_bracket", mm, ctx.tol));

        // transport of the lifted action through the 2-isomorphism
        double tr = 0;
        for (const auto& h : moment_pairs) {
            EElement ep = bE_triv.sigma_section(h);
            TrivPair mid{ep.v.base.xi,
                         ep.v.a.at({0}).with_domain(bE_triv.cover().ambient)};
            EElement e = bQ.sigma_section_w(mid);
            // the 2-isomorphism image of (ep, e)
            EElement img = e;
            Expr f = ep.g.at({0}).scalar();
            for (const auto& idx : bQ.cover().tuples(1)) {
                Form g = img.g.at(idx);
                img.g.parts[idx] = Form::from_scalar((g.scalar() + f).normalized(), g.domain());
            }
            HamPair back = bE_gerbe.sigma_E(img);
            tr = std::max(tr, hampair_residual(back + -1.0 * h, ctx, "square.transport"));
        }
        rep.add(CheckResult::from_residual("square.moment_transport", tr, ctx.tol));
    } else {
        rep.add(CheckResult::skip("square.moment_transport", "no moment map supplied"));
    }
    rep.sort_by_id();
    return rep;
}

} // namespace gerbecal::quantomorph
