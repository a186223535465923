#pragma once

#include <map>
#include <vector>

#include "gerbecal/expr.hpp"
#include "gerbecal/report.hpp"
#include "gerbecal/sampling.hpp"

namespace gerbecal::cartan {

using symexpr::Expr;
using symexpr::Point;

/// Differential form on a coordinate box.  Coefficients are indexed by
/// strictly increasing coordinate multi-indices; an absent index means a
/// zero coefficient.  Degree above the box dimension is the zero form.
class Form {
public:
    Form() = default;
    Form(int degree, Box domain);

    int degree() const { return degree_; }
    const Box& domain() const { return domain_; }
    const std::map<std::vector<int>, Expr>& terms() const { return terms_; }

    /// Adds `coef * dx_{idx}`; idx need not be sorted, signs are handled.
    void add_term(std::vector<int> idx, Expr coef);
    Expr coefficient(const std::vector<int>& idx) const; // zero if absent

    Form with_domain(Box b) const;
    bool structurally_zero() const;

    /// Scalar payload of a 0-form.
    Expr scalar() const;

    /// Coefficient values at a point, keyed by stored index.
    std::map<std::vector<int>, double> eval(const Point& p) const;

    friend Form operator+(const Form& a, const Form& b);
    friend Form operator-(const Form& a, const Form& b);
    friend Form operator*(double c, const Form& a);
    friend Form operator*(const Expr& c, const Form& a);
    Form operator-() const { return -1.0 * *this; }

    static Form zero(int degree, Box domain) { return Form(degree, domain); }
    static Form from_scalar(Expr f, Box domain);

private:
    int degree_ = 0;
    Box domain_;
    std::map<std::vector<int>, Expr> terms_;
};

/// Vector field: one component expression per box coordinate.
struct VectorField {
    Box domain;
    std::vector<Expr> components;

    VectorField() = default;
    explicit VectorField(Box b) : domain(std::move(b)), components(domain.dim(), Expr()) {}
    VectorField(Box b, std::vector<Expr> comps)
        : domain(std::move(b)), components(std::move(comps)) {}

    Expr component(const std::string& coord) const;
    /// X(f) = sum_i X^i df/dx_i
    Expr apply(const Expr& f) const;

    friend VectorField operator+(const VectorField& a, const VectorField& b);
    friend VectorField operator*(double c, const VectorField& a);
    VectorField operator-() const { return -1.0 * *this; }
    bool structurally_zero() const;
};

Form wedge(const Form& a, const Form& b);
Form exterior_d(const Form& a);

/// Interior product; convention iota_X(a ^ b) = (iota_X a)^b + (-1)^|a| a^(iota_X b).
/// Throws DegreeError on degree-0 input.
Form interior(const VectorField& X, const Form& a);

/// Cartan magic formula; degree-0 forms are handled directly as iota_X d f.
Form lie_derivative(const VectorField& X, const Form& a);

VectorField vf_bracket(const VectorField& X, const VectorField& Y);

/// Max abs of all coefficients over seeded samples in the form's domain.
SampledMax form_residual(const Form& f, const VerifyCtx& ctx, const std::string& context);
SampledMax vf_residual(const VectorField& X, const VerifyCtx& ctx, const std::string& context);

/// Primitive of a closed form on a star-shaped box: d(primitive(w)) + primitive(dw) = w
/// for degree >= 1.  Requires coefficients polynomial along rays (polynomial
/// forms are fine); throws DomainError otherwise.
Form poincare_primitive(const Form& w);

/// | L_X F - central finite difference of the flow pullback | at seeded
/// samples; the flow and its tangent map are integrated with one
/// fourth-order step of size h.
double lie_derivative_flow_residual(const VectorField& X, const Form& F, const VerifyCtx& ctx,
                                    double h, const std::string& context);

/// Two-sided check of the degree-3 obstruction identity:
///   -i_Z i_Y i_X dB = i_X(L_Y c - L_Z b) - i_[Y,Z] a + i_[Y,Z] i_X B + cyc.
/// Hypotheses L_X B = da, L_Y B = db, L_Z B = dc are verified first;
/// PreconditionFailed names the violated one.
struct AppendixReport {
    double residual = 0.0;
    Point witness;
};
AppendixReport check_appendix_identity(const Form& B, const VectorField& X, const VectorField& Y,
                                       const VectorField& Z, const Form& a, const Form& b,
                                       const Form& c, const VerifyCtx& ctx);

/// Random data generators used by property suites.
Form random_form(rng::Stream& st, int degree, const Box& box, int max_poly_degree = 3);
VectorField random_vf(rng::Stream& st, const Box& box, int max_poly_degree = 3);
/// Divergence-free field (curl of a random potential); dimension 3 only.
VectorField random_divfree_vf(rng::Stream& st, const Box& box, int max_poly_degree = 3);

} // namespace gerbecal::cartan
