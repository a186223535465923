#include "gerbecal/gerbevf.hpp"

#include <algorithm>

namespace gerbecal::gerbevf {

using cech::cechform_add;
using cech::cechform_scale;
using cech::tuple_str;

MultVF MultVF::zero(const Cover& cover) {
    MultVF v;
    v.xi = VectorField(cover.ambient);
    v.f = CechForm::zeros(cover, 0, 2);
    return v;
}

MultVF operator+(const MultVF& a, const MultVF& b) {
    return {a.xi + b.xi, cechform_add(a.f, b.f)};
}

MultVF operator*(double c, const MultVF& a) { return {c * a.xi, cechform_scale(c, a.f)}; }

AlgebroidSection AlgebroidSection::zero(const Cover& cover) {
    return {CechForm::zeros(cover, 0, 1)};
}

AlgebroidSection AlgebroidSection::constant(const Cover& cover, double c) {
    AlgebroidSection s = zero(cover);
    for (auto& [idx, f] : s.u.parts)
        f = Form::from_scalar(Expr::constant(c), f.domain());
    return s;
}

AlgebroidSection operator+(const AlgebroidSection& a, const AlgebroidSection& b) {
    return {cechform_add(a.u, b.u)};
}

AlgebroidSection operator*(double c, const AlgebroidSection& a) {
    return {cechform_scale(c, a.u)};
}

ConnMultVF ConnMultVF::zero(const Cover& cover) {
    return {MultVF::zero(cover), CechForm::zeros(cover, 1, 1)};
}

ConnMultVF operator+(const ConnMultVF& a, const ConnMultVF& b) {
    return {a.base + b.base, cechform_add(a.a, b.a)};
}

ConnMultVF operator*(double c, const ConnMultVF& a) {
    return {c * a.base, cechform_scale(c, a.a)};
}

Report validate_multvf(const Cover& cover, const DeligneCocycle& c, const MultVF& v,
                       const VerifyCtx& ctx) {
    Report rep;
    rep.suite = "multvf";
    for (const auto& idx : cover.tuples(3)) {
        const Box& box = cover.overlap(idx);
        std::vector<int> ij{idx[0], idx[1]}, jk{idx[1], idx[2]}, ik{idx[0], idx[2]};
        Form twist = c.phi.has(idx)
                         ? cartan::interior(v.xi, cartan::exterior_d(c.phi.at(idx))).with_domain(box)
                         : Form(0, box);
        Form resid = v.f.at(ik).with_domain(box) - twist - v.f.at(ij).with_domain(box) -
                     v.f.at(jk).with_domain(box);
        auto r = cartan::form_residual(resid, ctx, "multvf.cocycle" + tuple_str(idx));
        rep.add(CheckResult::from_residual("multvf.cocycle" + tuple_str(idx), r.value, ctx.tol,
                                           point_str(r.witness)));
    }
    if (rep.checks.empty())
        rep.add(CheckResult::pass("multvf.cocycle_vacuous", 0.0, "", "no triple overlaps"));
    rep.sort_by_id();
    return rep;
}

MultVF horizontal_lift(const Cover& cover, const DeligneCocycle& c, const VectorField& xi) {
    MultVF v;
    v.xi = xi;
    v.f.form_degree = 0;
    v.f.depth = 2;
    for (const auto& idx : cover.tuples(2)) {
        const Box& box = cover.overlap(idx);
        VectorField local(box, xi.components);
        v.f.set(idx, -1.0 * cartan::interior(local, c.A.at(idx)));
    }
    return v;
}

AlgebroidSection F_B_homotopy(const Cover& cover, const DeligneCocycle& c, const VectorField& xi,
                              const VectorField& zeta) {
    AlgebroidSection s;
    s.u.form_degree = 0;
    s.u.depth = 1;
    for (const auto& [idx, B] : c.B.parts) {
        const Box& box = cover.overlap(idx);
        VectorField lx(box, xi.components), lz(box, zeta.components);
        s.u.set(idx, cartan::interior(lx, cartan::interior(lz, B)));
    }
    return s;
}

MultVF mult_bracket(const Cover& cover, const MultVF& v1, const MultVF& v2) {
    MultVF out;
    out.xi = cartan::vf_bracket(v1.xi, v2.xi);
    out.f.form_degree = 0;
    out.f.depth = 2;
    for (const auto& idx : cover.tuples(2)) {
        const Box& box = cover.overlap(idx);
        VectorField lx(box, v1.xi.components), lz(box, v2.xi.components);
        Expr val = lx.apply(v2.f.at(idx).scalar()) - lz.apply(v1.f.at(idx).scalar());
        out.f.set(idx, Form::from_scalar(val.normalized(), box));
    }
    return out;
}

double F_B_homotopy_residual(const Cover& cover, const DeligneCocycle& c, const VectorField& xi,
                             const VectorField& zeta, const VerifyCtx& ctx) {
    MultVF lift_bracket = mult_bracket(cover, horizontal_lift(cover, c, xi),
                                       horizontal_lift(cover, c, zeta));
    MultVF bracket_lift = horizontal_lift(cover, c, cartan::vf_bracket(xi, zeta));
    AlgebroidSection u = F_B_homotopy(cover, c, xi, zeta);
    double worst = 0.0;
    for (const auto& idx : cover.tuples(2)) {
        const Box& box = cover.overlap(idx);
        // Lift[xi,zeta] - [Lift xi, Lift zeta] = u_i - u_j on U_ij
        Expr resid = bracket_lift.f.at(idx).scalar() - lift_bracket.f.at(idx).scalar() -
                     u.u.at({idx[0]}).scalar() + u.u.at({idx[1]}).scalar();
        worst = std::max(worst,
                         sampled_max_abs({resid.normalized()}, box, ctx, "F_B" + tuple_str(idx)).value);
    }
    return worst;
}

ConnMultVF bracket00(const Cover& cover, const ConnMultVF& v1, const ConnMultVF& v2) {
    ConnMultVF out;
    out.base = mult_bracket(cover, v1.base, v2.base);
    out.a.form_degree = 1;
    out.a.depth = 1;
    for (const auto& idx : cover.tuples(1)) {
        const Box& box = cover.overlap(idx);
        VectorField lx(box, v1.base.xi.components), lz(box, v2.base.xi.components);
        out.a.set(idx, cartan::lie_derivative(lx, v2.a.at(idx)) -
                           cartan::lie_derivative(lz, v1.a.at(idx)));
    }
    return out;
}

AlgebroidSection bracket01(const Cover& cover, const ConnMultVF& v, const AlgebroidSection& s) {
    AlgebroidSection out;
    out.u.form_degree = 0;
    out.u.depth = 1;
    for (const auto& idx : cover.tuples(1)) {
        const Box& box = cover.overlap(idx);
        VectorField lx(box, v.base.xi.components);
        out.u.set(idx, Form::from_scalar(lx.apply(s.u.at(idx).scalar()), box));
    }
    return out;
}

XElement bracket_x(const Cover& cover, const XElement& a, const XElement& b) {
    if (a.deg1 && b.deg1) throw DegreeError("bracket of two degree-1 elements");
    XElement out;
    if (a.deg0 && b.deg0) {
        out.deg0 = bracket00(cover, *a.deg0, *b.deg0);
    } else if (a.deg0 && b.deg1) {
        out.deg1 = bracket01(cover, *a.deg0, *b.deg1);
    } else if (a.deg1 && b.deg0) {
        out.deg1 = -1.0 * bracket01(cover, *b.deg0, *a.deg1);
    } else {
        throw DegreeError("bracket needs at least one degree-0 argument");
    }
    return out;
}

ConnMultVF diff_x(const Cover& cover, const AlgebroidSection& s) {
    ConnMultVF out = ConnMultVF::zero(cover);
    for (const auto& idx : cover.tuples(2)) {
        const Box& box = cover.overlap(idx);
        Expr val = s.u.at({idx[0]}).scalar() - s.u.at({idx[1]}).scalar();
        out.base.f.set(idx, Form::from_scalar(val.normalized(), box));
    }
    for (const auto& idx : cover.tuples(1)) {
        out.a.set(idx, -1.0 * cartan::exterior_d(s.u.at(idx)));
    }
    return out;
}

Report validate_connpres(const Cover& cover, const DeligneCocycle& c, const ConnMultVF& v,
                         const VerifyCtx& ctx, bool check_curving) {
    Report rep = validate_multvf(cover, c, v.base, ctx);
    rep.suite = "connpres";
    if (check_curving) {
        for (const auto& [idx, B] : c.B.parts) {
            const Box& box = cover.overlap(idx);
            VectorField lx(box, v.base.xi.components);
            Form resid = cartan::lie_derivative(lx, B) - cartan::exterior_d(v.a.at(idx));
            auto r = cartan::form_residual(resid, ctx, "connpres.curving" + tuple_str(idx));
            rep.add(CheckResult::from_residual("connpres.curving" + tuple_str(idx), r.value, ctx.tol,
                                               point_str(r.witness)));
        }
    }
    for (const auto& idx : cover.tuples(2)) {
        const Box& box = cover.overlap(idx);
        VectorField lx(box, v.base.xi.components);
        Form resid = v.a.at({idx[1]}).with_domain(box) - v.a.at({idx[0]}).with_domain(box) -
                     cartan::lie_derivative(lx, c.A.at(idx)) -
                     cartan::exterior_d(v.base.f.at(idx));
        auto r = cartan::form_residual(resid, ctx, "connpres.glue" + tuple_str(idx));
        rep.add(CheckResult::from_residual("connpres.connection" + tuple_str(idx), r.value, ctx.tol,
                                           point_str(r.witness)));
    }
    rep.sort_by_id();
    return rep;
}

AlgebroidSection morphism_defect(const Cover& cover, const DeligneCocycle& c,
                                 const VectorField& x1, const VectorField& x2,
                                 const VectorField& x3) {
    auto FB = [&](const VectorField& a, const VectorField& b) {
        return F_B_homotopy(cover, c, a, b);
    };
    auto act = [&](const VectorField& x, const AlgebroidSection& s) {
        AlgebroidSection out;
        out.u.form_degree = 0;
        out.u.depth = 1;
        for (const auto& [idx, f] : s.u.parts) {
            VectorField lx(f.domain(), x.components);
            out.u.set(idx, Form::from_scalar(lx.apply(f.scalar()), f.domain()));
        }
        return out;
    };
    VectorField b23 = cartan::vf_bracket(x2, x3);
    VectorField b12 = cartan::vf_bracket(x1, x2);
    VectorField b13 = cartan::vf_bracket(x1, x3);
    // F_B(x1,[x2,x3]) - F_B([x1,x2],x3) - F_B(x2,[x1,x3])
    //   + L_{x3} F_B(x1,x2) + L_{x1} F_B(x2,x3) - L_{x2} F_B(x1,x3)
    AlgebroidSection d = FB(x1, b23) + -1.0 * FB(b12, x3) + -1.0 * FB(x2, b13);
    d = d + act(x3, FB(x1, x2)) + act(x1, FB(x2, x3)) + -1.0 * act(x2, FB(x1, x3));
    return d;
}

Report morphism_defect_check(const Cover& cover, const DeligneCocycle& c, const VectorField& x1,
                             const VectorField& x2, const VectorField& x3, const VerifyCtx& ctx,
                             const std::string& prefix) {
    Report rep;
    rep.suite = prefix;
    AlgebroidSection d = morphism_defect(cover, c, x1, x2, x3);
    double worst = 0.0;
    for (const auto& [idx, B] : c.B.parts) {
        const Box& box = cover.overlap(idx);
        VectorField l1(box, x1.components), l2(box, x2.components), l3(box, x3.components);
        Form expect =
            cartan::interior(l1, cartan::interior(l2, cartan::interior(l3, cartan::exterior_d(B))));
        Form resid = d.u.at(idx) - expect;
        worst = std::max(worst,
                         cartan::form_residual(resid, ctx, prefix + tuple_str(idx)).value);
    }
    rep.add(CheckResult::from_residual(prefix + ".defect_is_triple_contraction", worst, ctx.tol));
    rep.sort_by_id();
    return rep;
}

AlgebroidSection section_from_vertical(const Cover& cover, const MultVF& v, const VerifyCtx& ctx) {
    double base = cartan::vf_residual(v.xi, ctx, "section_solve.base").value;
    if (base > ctx.tol)
        throw PreconditionFailed("section_from_vertical: base field must vanish");

    const int n = static_cast<int>(cover.charts.size());
    std::vector<std::optional<Expr>> u(static_cast<std::size_t>(n));
    u[0] = Expr();
    // propagate through the overlap graph: f_ij = u_i - u_j
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& idx : cover.tuples(2)) {
            int i = idx[0], j = idx[1];
            Expr fij = v.f.at(idx).scalar();
            if (u[static_cast<std::size_t>(i)] && !u[static_cast<std::size_t>(j)]) {
                u[static_cast<std::size_t>(j)] = (*u[static_cast<std::size_t>(i)] - fij).normalized();
                changed = true;
            } else if (!u[static_cast<std::size_t>(i)] && u[static_cast<std::size_t>(j)]) {
                u[static_cast<std::size_t>(i)] = (*u[static_cast<std::size_t>(j)] + fij).normalized();
                changed = true;
            }
        }
    }
    AlgebroidSection s;
    s.u.form_degree = 0;
    s.u.depth = 1;
    for (int i = 0; i < n; ++i) {
        if (!u[static_cast<std::size_t>(i)])
            throw NotInKernel("cover component not reachable from chart 1");
        s.u.set({i}, Form::from_scalar(*u[static_cast<std::size_t>(i)],
                                       cover.charts[static_cast<std::size_t>(i)]));
    }
    return s;
}

double section_residual(const AlgebroidSection& s, const VerifyCtx& ctx,
                        const std::string& label) {
    double worst = 0.0;
    for (const auto& [idx, f] : s.u.parts)
        worst = std::max(worst, cartan::form_residual(f, ctx, label + tuple_str(idx)).value);
    return worst;
}

double connmultvf_residual(const Cover& cover, const ConnMultVF& v, const VerifyCtx& ctx,
                           const std::string& label) {
    (void)cover;
    double worst = cartan::vf_residual(v.base.xi, ctx, label + ".xi").value;
    for (const auto& [idx, f] : v.base.f.parts)
        worst = std::max(worst, cartan::form_residual(f, ctx, label + ".f" + tuple_str(idx)).value);
    for (const auto& [idx, a] : v.a.parts)
        worst = std::max(worst, cartan::form_residual(a, ctx, label + ".a" + tuple_str(idx)).value);
    return worst;
}

ConnMultVF conn_from_ham(const Cover& cover, const DeligneCocycle& c, const plectic::HamPair& h) {
    ConnMultVF out;
    out.base = horizontal_lift(cover, c, h.xi);
    out.a.form_degree = 1;
    out.a.depth = 1;
    for (const auto& [idx, B] : c.B.parts) {
        const Box& box = cover.overlap(idx);
        VectorField lx(box, h.xi.components);
        out.a.set(idx, cartan::interior(lx, B) - h.beta.with_domain(box));
    }
    return out;
}

AlgebroidSection random_section(const Cover& cover, rng::Stream& st, int max_degree) {
    AlgebroidSection s;
    s.u.form_degree = 0;
    s.u.depth = 1;
    for (const auto& idx : cover.tuples(1)) {
        const Box& box = cover.overlap(idx);
        s.u.set(idx, Form::from_scalar(random_polynomial(st, box.coords, max_degree), box));
    }
    return s;
}

TrivPair TrivPair::zero(const Box& M) { return {VectorField(M), Form(1, M)}; }

TrivPair operator+(const TrivPair& a, const TrivPair& b) { return {a.xi + b.xi, a.A + b.A}; }

TrivPair operator*(double c, const TrivPair& a) { return {c * a.xi, c * a.A}; }

TrivGerbeModel::E0 TrivGerbeModel::d(const E1& f) const {
    return {VectorField(M), -1.0 * cartan::exterior_d(Form::from_scalar(f, M))};
}

TrivGerbeModel::E0 TrivGerbeModel::b00(const E0& x, const E0& y) const {
    return {cartan::vf_bracket(x.xi, y.xi),
            cartan::lie_derivative(x.xi, y.A) - cartan::lie_derivative(y.xi, x.A)};
}

double TrivGerbeModel::resid0(const E0& x, const std::string& label) const {
    double r = cartan::vf_residual(x.xi, ctx, label + ".xi").value;
    return std::max(r, cartan::form_residual(x.A, ctx, label + ".A").value);
}

double TrivGerbeModel::resid1(const E1& f, const std::string& label) const {
    Expr n = f.normalized();
    if (n.is_zero()) return 0.0;
    return sampled_max_abs({n}, M, ctx, label).value;
}

double TrivGerbeModel::member_residual(const E0& x, const std::string& label) const {
    Form resid = cartan::lie_derivative(x.xi, omega) - cartan::exterior_d(x.A);
    return cartan::form_residual(resid, ctx, label).value;
}

TrivPair TrivGerbeModel::from_ham(const plectic::HamPair& h) const {
    return {h.xi, cartan::interior(h.xi, omega) - h.beta};
}

} // namespace gerbecal::gerbevf
