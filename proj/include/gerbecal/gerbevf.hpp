#pragma once

#include "gerbecal/cech.hpp"
#include "gerbecal/plectic.hpp"

namespace gerbecal::gerbevf {

using cartan::Form;
using cartan::VectorField;
using cech::CechForm;
using cech::Cover;
using cech::DeligneCocycle;
using symexpr::Expr;

/// Multiplicative vector field in cover coordinates: a base field on M and
/// fibre components f_ij on double overlaps twisted by the phase cocycle.
struct MultVF {
    VectorField xi;
    CechForm f; // (0, 2)

    static MultVF zero(const Cover& cover);
    friend MultVF operator+(const MultVF& a, const MultVF& b);
    friend MultVF operator*(double c, const MultVF& a);
};

/// Morphism datum: chart functions u_i.
struct AlgebroidSection {
    CechForm u; // (0, 1)

    static AlgebroidSection zero(const Cover& cover);
    static AlgebroidSection constant(const Cover& cover, double c);
    friend AlgebroidSection operator+(const AlgebroidSection& a, const AlgebroidSection& b);
    friend AlgebroidSection operator*(double c, const AlgebroidSection& a);
};

/// Connection-preserving multiplicative vector field: additionally carries
/// chart 1-forms a_i with L_xi B_i = d a_i and a_j - a_i = L_xi A_ij + d f_ij.
struct ConnMultVF {
    MultVF base;
    CechForm a; // (1, 1)

    static ConnMultVF zero(const Cover& cover);
    friend ConnMultVF operator+(const ConnMultVF& a, const ConnMultVF& b);
    friend ConnMultVF operator*(double c, const ConnMultVF& a);
};

Report validate_multvf(const Cover& cover, const DeligneCocycle& c, const MultVF& v,
                       const VerifyCtx& ctx);

/// f_ij = -iota_xi A_ij.
MultVF horizontal_lift(const Cover& cover, const DeligneCocycle& c, const VectorField& xi);

/// u_i = iota_xi iota_zeta B_i; connects the bracket of lifts to the lift
/// of the bracket.
AlgebroidSection F_B_homotopy(const Cover& cover, const DeligneCocycle& c, const VectorField& xi,
                              const VectorField& zeta);

/// Sampled check that Lift[xi,zeta] - [Lift xi, Lift zeta] = d(F_B(xi,zeta)).
double F_B_homotopy_residual(const Cover& cover, const DeligneCocycle& c, const VectorField& xi,
                             const VectorField& zeta, const VerifyCtx& ctx);

/// Bracket of plain multiplicative fields (no connection data).
MultVF mult_bracket(const Cover& cover, const MultVF& v1, const MultVF& v2);

ConnMultVF bracket00(const Cover& cover, const ConnMultVF& v1, const ConnMultVF& v2);
AlgebroidSection bracket01(const Cover& cover, const ConnMultVF& v, const AlgebroidSection& s);

/// Tagged element of the infinitesimal-symmetry 2-vector space; bracket_x
/// rejects two degree-1 arguments.
struct XElement {
    std::optional<ConnMultVF> deg0;
    std::optional<AlgebroidSection> deg1;
};
XElement bracket_x(const Cover& cover, const XElement& a, const XElement& b);

/// d u = ((0, {u_i - u_j}), {-d u_i}).
ConnMultVF diff_x(const Cover& cover, const AlgebroidSection& s);

/// Both connection-preservation conditions; the curving check can be
/// switched off to validate connection-only data.
Report validate_connpres(const Cover& cover, const DeligneCocycle& c, const ConnMultVF& v,
                         const VerifyCtx& ctx, bool check_curving = true);

/// Six-term defect of the horizontal lift on a triple of fields, as a
/// section; equals {iota_1 iota_2 iota_3 dB_i} when the lift data is
/// consistent (verified by morphism_defect_check).
AlgebroidSection morphism_defect(const Cover& cover, const DeligneCocycle& c,
                                 const VectorField& x1, const VectorField& x2,
                                 const VectorField& x3);
Report morphism_defect_check(const Cover& cover, const DeligneCocycle& c, const VectorField& x1,
                             const VectorField& x2, const VectorField& x3, const VerifyCtx& ctx,
                             const std::string& prefix);

/// Constructive inverse of diff_x on vertical fields: chart functions u with
/// u_i - u_j = f_ij, anchored at u_0 = 0 and propagated through the overlap
/// graph.  Requires the base field of `v` to vanish.
AlgebroidSection section_from_vertical(const Cover& cover, const MultVF& v, const VerifyCtx& ctx);

double section_residual(const AlgebroidSection& s, const VerifyCtx& ctx,
                        const std::string& label);
double connmultvf_residual(const Cover& cover, const ConnMultVF& v, const VerifyCtx& ctx,
                           const std::string& label);

/// Valid connection-preserving field from a Hamiltonian pair of the
/// 3-curvature: horizontal fibre components and a_i = iota_xi B_i - beta.
ConnMultVF conn_from_ham(const Cover& cover, const DeligneCocycle& c, const plectic::HamPair& h);

/// Lie-2 model for the connection-preserving fields (strict, J = 0).
struct GerbeVfModel {
    const Cover* cover;
    const DeligneCocycle* coc;
    VerifyCtx ctx;

    using E0 = ConnMultVF;
    using E1 = AlgebroidSection;

    E0 d(const E1& s) const { return diff_x(*cover, s); }
    E0 b00(const E0& x, const E0& y) const { return bracket00(*cover, x, y); }
    E1 b01(const E0& x, const E1& s) const { return bracket01(*cover, x, s); }
    E1 jac(const E0&, const E0&, const E0&) const { return E1::zero(*cover); }
    E0 add0(const E0& a, const E0& b) const { return a + b; }
    E0 scale0(double c, const E0& a) const { return c * a; }
    E1 add1(const E1& a, const E1& b) const { return a + b; }
    E1 scale1(double c, const E1& a) const { return c * a; }
    double resid0(const E0& v, const std::string& label) const {
        return connmultvf_residual(*cover, v, ctx, label);
    }
    double resid1(const E1& s, const std::string& label) const {
        return section_residual(s, ctx, label);
    }
};

AlgebroidSection random_section(const Cover& cover, rng::Stream& st, int max_degree = 2);

// ---------------------------------------------------------------------------
// The trivial-gerbe instance: degree 0 is pairs (xi, A) with L_xi omega = dA,
// degree 1 is functions, d f = (0, -df).

struct TrivPair {
    VectorField xi;
    Form A; // degree 1

    static TrivPair zero(const Box& M);
    friend TrivPair operator+(const TrivPair& a, const TrivPair& b);
    friend TrivPair operator*(double c, const TrivPair& a);
};

struct TrivGerbeModel {
    Box M;
    Form omega; // curving 2-form
    VerifyCtx ctx;

    using E0 = TrivPair;
    using E1 = Expr;

    E0 d(const E1& f) const;
    E0 b00(const E0& x, const E0& y) const;
    E1 b01(const E0& x, const E1& f) const { return x.xi.apply(f); }
    E1 jac(const E0&, const E0&, const E0&) const { return Expr(); }
    E0 add0(const E0& a, const E0& b) const { return a + b; }
    E0 scale0(double c, const E0& a) const { return c * a; }
    E1 add1(const E1& a, const E1& b) const { return (a + b).normalized(); }
    E1 scale1(double c, const E1& a) const { return (Expr::constant(c) * a).normalized(); }
    double resid0(const E0& x, const std::string& label) const;
    double resid1(const E1& f, const std::string& label) const;

    /// Membership residual of L_xi omega = dA.
    double member_residual(const E0& x, const std::string& label) const;
    /// (xi, iota_xi omega - beta) from a Hamiltonian pair of (M, d omega).
    TrivPair from_ham(const plectic::HamPair& h) const;
};

} // namespace gerbecal::gerbevf
