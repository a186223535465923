#include "gerbecal/cartan.hpp"

#include <algorithm>
#include <cmath>

namespace gerbecal::cartan {

namespace {

// Sorts idx ascending, returns permutation sign; 0 on repeated index.
int sort_index(std::vector<int>& idx) {
    int sign = 1;
    for (std::size_t i = 1; i < idx.size(); ++i) {
        for (std::size_t j = i; j > 0 && idx[j] < idx[j - 1]; --j) {
            std::swap(idx[j], idx[j - 1]);
            sign = -sign;
        }
    }
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (idx[i] == idx[i - 1]) return 0;
    return sign;
}

// Merge two strictly increasing index sets; 0 sign if they intersect.
int merge_indices(const std::vector<int>& a, const std::vector<int>& b, std::vector<int>& out) {
    out = a;
    out.insert(out.end(), b.begin(), b.end());
    return sort_index(out);
}

} // namespace

Form::Form(int degree, Box domain) : degree_(degree), domain_(std::move(domain)) {}

void Form::add_term(std::vector<int> idx, Expr coef) {
    if (static_cast<int>(idx.size()) != degree_)
        throw DegreeError("term index length does not match form degree");
    int sign = sort_index(idx);
    if (sign == 0) return;
    Expr add = sign == 1 ? coef : (Expr::constant(-1.0) * coef);
    auto it = terms_.find(idx);
    Expr combined = (it == terms_.end()) ? add : (it->second + add);
    combined = combined.normalized();
    if (combined.is_zero()) {
        if (it != terms_.end()) terms_.erase(it);
    } else {
        terms_[idx] = combined;
    }
}

Expr Form::coefficient(const std::vector<int>& idx) const {
    auto it = terms_.find(idx);
    return it == terms_.end() ? Expr() : it->second;
}

Form Form::with_domain(Box b) const {
    Form r(degree_, std::move(b));
    r.terms_ = terms_;
    return r;
}

bool Form::structurally_zero() const { return terms_.empty(); }

Expr Form::scalar() const {
    if (degree_ != 0) throw DegreeError("scalar() on form of positive degree");
    return coefficient({});
}

std::map<std::vector<int>, double> Form::eval(const Point& p) const {
    std::map<std::vector<int>, double> out;
    for (const auto& [idx, c] : terms_) out[idx] = c.eval(p);
    return out;
}

Form Form::from_scalar(Expr f, Box domain) {
    Form r(0, std::move(domain));
    r.add_term({}, std::move(f));
    return r;
}

Form operator+(const Form& a, const Form& b) {
    if (a.degree_ != b.degree_) throw DegreeError("adding forms of different degree");
    if (!a.domain_.same_coords(b.domain_)) throw DimensionMismatch("adding forms on different coordinates");
    Form r = a;
    for (const auto& [idx, c] : b.terms_) r.add_term(idx, c);
    return r;
}

Form operator-(const Form& a, const Form& b) { return a + (-1.0 * b); }

Form operator*(double c, const Form& a) { return Expr::constant(c) * a; }

Form operator*(const Expr& c, const Form& a) {
    Form r(a.degree_, a.domain_);
    for (const auto& [idx, e] : a.terms_) r.add_term(idx, c * e);
    return r;
}

Expr VectorField::component(const std::string& coord) const {
    for (std::size_t i = 0; i < domain.coords.size(); ++i)
        if (domain.coords[i] == coord) return components[i];
    throw DimensionMismatch("no component for coordinate " + coord);
}

Expr VectorField::apply(const Expr& f) const {
    Expr r;
    for (std::size_t i = 0; i < domain.coords.size(); ++i)
        r = r + components[i] * f.diff(domain.coords[i]);
    return r.normalized();
}

VectorField operator+(const VectorField& a, const VectorField& b) {
    if (!a.domain.same_coords(b.domain)) throw DimensionMismatch("adding fields on different coordinates");
    VectorField r(a.domain);
    for (std::size_t i = 0; i < a.components.size(); ++i)
        r.components[i] = (a.components[i] + b.components[i]).normalized();
    return r;
}

VectorField operator*(double c, const VectorField& a) {
    VectorField r(a.domain);
    for (std::size_t i = 0; i < a.components.size(); ++i)
        r.components[i] = (Expr::constant(c) * a.components[i]).normalized();
    return r;
}

bool VectorField::structurally_zero() const {
    for (const auto& c : components)
        if (!c.normalized().is_zero()) return false;
    return true;
}

Form wedge(const Form& a, const Form& b) {
    if (!a.domain().same_coords(b.domain()))
        throw DimensionMismatch("wedging forms on different coordinates");
    Form r(a.degree() + b.degree(), a.domain());
    if (r.degree() > static_cast<int>(a.domain().dim())) return r; // zero form
    for (const auto& [ia, ca] : a.terms()) {
        for (const auto& [ib, cb] : b.terms()) {
            std::vector<int> merged;
            int sign = merge_indices(ia, ib, merged);
            if (sign == 0) continue;
            r.add_term(merged, Expr::constant(sign) * ca * cb);
        }
    }
    return r;
}

Form exterior_d(const Form& a) {
    Form r(a.degree() + 1, a.domain());
    if (r.degree() > static_cast<int>(a.domain().dim())) return r;
    const auto& coords = a.domain().coords;
    for (const auto& [idx, c] : a.terms()) {
        for (int v = 0; v < static_cast<int>(coords.size()); ++v) {
            if (std::binary_search(idx.begin(), idx.end(), v)) continue;
            Expr dc = c.diff(coords[static_cast<std::size_t>(v)]).normalized();
            if (dc.is_zero()) continue;
            std::vector<int> nidx = idx;
            nidx.insert(nidx.begin(), v);
            r.add_term(nidx, dc);
        }
    }
    return r;
}

Form interior(const VectorField& X, const Form& a) {
    if (a.degree() == 0) throw DegreeError("interior product of a vector field with a 0-form");
    if (!X.domain.same_coords(a.domain()))
        throw DimensionMismatch("interior product on different coordinates");
    Form r(a.degree() - 1, a.domain());
    for (const auto& [idx, c] : a.terms()) {
        for (std::size_t m = 0; m < idx.size(); ++m) {
            const Expr& comp = X.components[static_cast<std::size_t>(idx[m])];
            if (comp.is_zero()) continue;
            std::vector<int> nidx;
            nidx.reserve(idx.size() - 1);
            for (std::size_t j = 0; j < idx.size(); ++j)
                if (j != m) nidx.push_back(idx[j]);
            double sign = (m % 2 == 0) ? 1.0 : -1.0;
            r.add_term(nidx, Expr::constant(sign) * comp * c);
        }
    }
    return r;
}

Form lie_derivative(const VectorField& X, const Form& a) {
    if (a.degree() == 0) {
        return Form::from_scalar(X.apply(a.scalar()), a.domain());
    }
    return interior(X, exterior_d(a)) + exterior_d(interior(X, a));
}

VectorField vf_bracket(const VectorField& X, const VectorField& Y) {
    if (!X.domain.same_coords(Y.domain))
        throw DimensionMismatch("bracket of fields on different coordinates");
    VectorField r(X.domain);
    for (std::size_t i = 0; i < r.components.size(); ++i)
        r.components[i] = (X.apply(Y.components[i]) - Y.apply(X.components[i])).normalized();
    return r;
}

SampledMax form_residual(const Form& f, const VerifyCtx& ctx, const std::string& context) {
    std::vector<Expr> coeffs;
    for (const auto& [idx, c] : f.terms()) coeffs.push_back(c);
    if (coeffs.empty()) return {};
    return sampled_max_abs(coeffs, f.domain(), ctx, context);
}

SampledMax vf_residual(const VectorField& X, const VerifyCtx& ctx, const std::string& context) {
    std::vector<Expr> nonzero;
    for (const auto& c : X.components)
        if (!c.normalized().is_zero()) nonzero.push_back(c);
    if (nonzero.empty()) return {};
    return sampled_max_abs(nonzero, X.domain, ctx, context);
}

Form poincare_primitive(const Form& w) {
    const int k = w.degree();
    if (k < 1) throw DegreeError("poincare_primitive needs degree >= 1");
    const Box& box = w.domain();
    const auto c = box.center();
    const std::string tvar = "_ray_t";
    for (const auto& name : box.coords)
        if (name == tvar) throw DomainError("coordinate name collides with ray parameter");

    std::map<std::string, Expr> ray;
    for (std::size_t i = 0; i < box.dim(); ++i) {
        // x_i -> c_i + t (x_i - c_i)
        ray[box.coords[i]] = Expr::constant(c[i]) +
                             Expr::var(tvar) * (Expr::var(box.coords[i]) - Expr::constant(c[i]));
    }

    Form out(k - 1, box);
    for (const auto& [idx, coef] : w.terms()) {
        Expr along_ray = coef.substituted(ray).normalized();
        // integrate t^{k-1} * along_ray over [0, 1]
        auto cs = along_ray.poly_coeffs(tvar);
        Expr integrated;
        for (std::size_t j = 0; j < cs.size(); ++j)
            integrated = integrated + cs[j] * Expr::constant(1.0 / (k + static_cast<double>(j)));
        integrated = integrated.normalized();
        if (integrated.is_zero()) continue;
        for (std::size_t m = 0; m < idx.size(); ++m) {
            std::vector<int> nidx;
            for (std::size_t j = 0; j < idx.size(); ++j)
                if (j != m) nidx.push_back(idx[j]);
            double sign = (m % 2 == 0) ? 1.0 : -1.0;
            Expr radial = Expr::var(box.coords[static_cast<std::size_t>(idx[m])]) -
                          Expr::constant(c[static_cast<std::size_t>(idx[m])]);
            out.add_term(nidx, Expr::constant(sign) * radial * integrated);
        }
    }
    return out;
}

namespace {

// One RK4 step of the flow of X together with its tangent map.
void flow_step(const VectorField& X, const std::vector<std::vector<Expr>>& DX,
               const Point& start, double h, std::vector<double>& x_out,
               std::vector<std::vector<double>>& J_out) {
    const auto& coords = X.domain.coords;
    const std::size_t n = coords.size();

    auto eval_state = [&](const std::vector<double>& x, const std::vector<std::vector<double>>& J,
                          std::vector<double>& dx, std::vector<std::vector<double>>& dJ) {
        Point p;
        for (std::size_t i = 0; i < n; ++i) p[coords[i]] = x[i];
        dx.assign(n, 0.0);
        for (std::size_t i = 0; i < n; ++i) dx[i] = X.components[i].eval(p);
        std::vector<std::vector<double>> A(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) A[i][j] = DX[i][j].eval(p);
        dJ.assign(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                for (std::size_t l = 0; l < n; ++l) dJ[i][j] += A[i][l] * J[l][j];
    };

    std::vector<double> x0(n);
    for (std::size_t i = 0; i < n; ++i) x0[i] = start.at(coords[i]);
    std::vector<std::vector<double>> J0(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i) J0[i][i] = 1.0;

    auto axpy = [&](const std::vector<double>& x, const std::vector<std::vector<double>>& J,
                    const std::vector<double>& dx, const std::vector<std::vector<double>>& dJ,
                    double s, std::vector<double>& xo, std::vector<std::vector<double>>& Jo) {
        xo = x;
        Jo = J;
        for (std::size_t i = 0; i < n; ++i) {
            xo[i] += s * dx[i];
            for (std::size_t j = 0; j < n; ++j) Jo[i][j] += s * dJ[i][j];
        }
    };

    std::vector<double> k1x, k2x, k3x, k4x, tx;
    std::vector<std::vector<double>> k1J, k2J, k3J, k4J, tJ;
    eval_state(x0, J0, k1x, k1J);
    axpy(x0, J0, k1x, k1J, h / 2, tx, tJ);
    eval_state(tx, tJ, k2x, k2J);
    axpy(x0, J0, k2x, k2J, h / 2, tx, tJ);
    eval_state(tx, tJ, k3x, k3J);
    axpy(x0, J0, k3x, k3J, h, tx, tJ);
    eval_state(tx, tJ, k4x, k4J);

    x_out = x0;
    J_out = J0;
    for (std::size_t i = 0; i < n; ++i) {
        x_out[i] += h / 6.0 * (k1x[i] + 2 * k2x[i] + 2 * k3x[i] + k4x[i]);
        for (std::size_t j = 0; j < n; ++j)
            J_out[i][j] += h / 6.0 * (k1J[i][j] + 2 * k2J[i][j] + 2 * k3J[i][j] + k4J[i][j]);
    }
}

double det_minor(const std::vector<std::vector<double>>& J, const std::vector<int>& rows,
                 const std::vector<int>& cols) {
    const std::size_t k = rows.size();
    if (k == 0) return 1.0;
    if (k == 1) return J[static_cast<std::size_t>(rows[0])][static_cast<std::size_t>(cols[0])];
    double det = 0.0;
    std::vector<int> sub_rows(rows.begin() + 1, rows.end());
    for (std::size_t m = 0; m < k; ++m) {
        std::vector<int> sub_cols;
        for (std::size_t j = 0; j < k; ++j)
            if (j != m) sub_cols.push_back(cols[j]);
        double sign = (m % 2 == 0) ? 1.0 : -1.0;
        det += sign * J[static_cast<std::size_t>(rows[0])][static_cast<std::size_t>(cols[m])] *
               det_minor(J, sub_rows, sub_cols);
    }
    return det;
}

// Pullback of F along the map with Jacobian J at image point q, evaluated on
// the coordinate frame with increasing index set `idx`.
double pullback_value(const Form& F, const Point& q, const std::vector<std::vector<double>>& J,
                      const std::vector<int>& idx) {
    double v = 0.0;
    for (const auto& [jdx, coef] : F.terms()) {
        double minor = det_minor(J, jdx, idx);
        if (minor == 0.0) continue;
        v += coef.eval(q) * minor;
    }
    return v;
}

} // namespace

double lie_derivative_flow_residual(const VectorField& X, const Form& F, const VerifyCtx& ctx,
                                    double h, const std::string& context) {
    const auto& coords = X.domain.coords;
    const std::size_t n = coords.size();
    std::vector<std::vector<Expr>> DX(n, std::vector<Expr>(n));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) DX[i][j] = X.components[i].diff(coords[j]).normalized();

    Form LXF = lie_derivative(X, F);
    auto pts = sample_points(X.domain, ctx.samples, ctx.seed, context);

    double worst = 0.0;
    for (const auto& p : pts) {
        std::vector<double> xp, xm;
        std::vector<std::vector<double>> Jp, Jm;
        flow_step(X, DX, p, h, xp, Jp);
        flow_step(X, DX, p, -h, xm, Jm);
        Point qp, qm;
        for (std::size_t i = 0; i < n; ++i) {
            qp[coords[i]] = xp[i];
            qm[coords[i]] = xm[i];
        }
        // all increasing index sets of the form's degree that appear
        for (const auto& [idx, coef] : LXF.terms()) {
            double fd = (pullback_value(F, qp, Jp, idx) - pullback_value(F, qm, Jm, idx)) / (2 * h);
            worst = std::max(worst, std::abs(fd - coef.eval(p)));
        }
        // indices where L_X F vanishes but F does not: compare fd against 0
        for (const auto& [idx, coef] : F.terms()) {
            if (LXF.terms().count(idx)) continue;
            double fd = (pullback_value(F, qp, Jp, idx) - pullback_value(F, qm, Jm, idx)) / (2 * h);
            worst = std::max(worst, std::abs(fd));
        }
    }
    return worst;
}

AppendixReport check_appendix_identity(const Form& B, const VectorField& X, const VectorField& Y,
                                       const VectorField& Z, const Form& a, const Form& b,
                                       const Form& c, const VerifyCtx& ctx) {
    struct Hyp {
        const VectorField* f;
        const Form* pot;
        const char* label;
    };
    const Hyp hyps[] = {{&X, &a, "L_X B = da"}, {&Y, &b, "L_Y B = db"}, {&Z, &c, "L_Z B = dc"}};
    for (const auto& h : hyps) {
        Form resid = lie_derivative(*h.f, B) - exterior_d(*h.pot);
        auto r = form_residual(resid, ctx, std::string("appendix.pre.") + h.label);
        if (r.value > ctx.tol) throw PreconditionFailed(h.label);
    }

    Form lhs = -1.0 * interior(Z, interior(Y, interior(X, exterior_d(B))));

    auto term = [&](const VectorField& U, const VectorField& V, const VectorField& W,
                    const Form& pu, const Form& pv, const Form& pw) {
        // i_U (L_V pw - L_W pv) - i_[V,W] pu + i_[V,W] i_U B
        VectorField VW = vf_bracket(V, W);
        Form t = interior(U, lie_derivative(V, pw) - lie_derivative(W, pv));
        t = t - interior(VW, pu);
        t = t + interior(VW, interior(U, B));
        return t;
    };
    Form rhs = term(X, Y, Z, a, b, c) + term(Y, Z, X, b, c, a) + term(Z, X, Y, c, a, b);

    auto r = form_residual(lhs - rhs, ctx, "appendix.identity");
    return {r.value, r.witness};
}

Form random_form(rng::Stream& st, int degree, const Box& box, int max_poly_degree) {
    Form f(degree, box);
    if (degree > static_cast<int>(box.dim())) return f;
    // iterate all increasing index sets
    std::vector<int> stack;
    auto gen = [&](auto&& self, int start) -> void {
        if (static_cast<int>(stack.size()) == degree) {
            f.add_term(stack, random_polynomial(st, box.coords, max_poly_degree));
            return;
        }
        for (int v = start; v < static_cast<int>(box.dim()); ++v) {
            stack.push_back(v);
            self(self, v + 1);
            stack.pop_back();
        }
    };
    gen(gen, 0);
    return f;
}

VectorField random_vf(rng::Stream& st, const Box& box, int max_poly_degree) {
    VectorField X(box);
    for (std::size_t i = 0; i < box.dim(); ++i)
        X.components[i] = random_polynomial(st, box.coords, max_poly_degree);
    return X;
}

VectorField random_divfree_vf(rng::Stream& st, const Box& box, int max_poly_degree) {
    if (box.dim() != 3) throw DimensionMismatch("divergence-free generator needs dimension 3");
    // X = curl A for a random potential A
    Expr A0 = random_polynomial(st, box.coords, max_poly_degree);
    Expr A1 = random_polynomial(st, box.coords, max_poly_degree);
    Expr A2 = random_polynomial(st, box.coords, max_poly_degree);
    const auto& c = box.coords;
    VectorField X(box);
    X.components[0] = (A2.diff(c[1]) - A1.diff(c[2])).normalized();
    X.components[1] = (A0.diff(c[2]) - A2.diff(c[0])).normalized();
    X.components[2] = (A1.diff(c[0]) - A0.diff(c[1])).normalized();
    return X;
}

} // namespace gerbecal::cartan
