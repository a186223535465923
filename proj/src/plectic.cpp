#include "gerbecal/plectic.hpp"

namespace gerbecal::plectic {

double PlecticManifold::closedness_residual(const VerifyCtx& ctx) const {
    return cartan::form_residual(cartan::exterior_d(chi), ctx, "plectic.closed").value;
}

HamPair HamPair::zero(const Box& M) { return {VectorField(M), Form(1, M)}; }

HamPair operator+(const HamPair& a, const HamPair& b) { return {a.xi + b.xi, a.beta + b.beta}; }

HamPair operator*(double c, const HamPair& a) { return {c * a.xi, c * a.beta}; }

double validate_ham_pair(const PlecticManifold& P, const HamPair& h, const VerifyCtx& ctx,
                         const std::string& context) {
    Form resid = cartan::interior(h.xi, P.chi) + cartan::exterior_d(h.beta);
    return cartan::form_residual(resid, ctx, context).value;
}

HamPair plectic_d(const PlecticManifold& P, const Expr& f) {
    return {VectorField(P.M), cartan::exterior_d(Form::from_scalar(f, P.M))};
}

HamPair plectic_bracket(const PlecticManifold& P, const HamPair& h1, const HamPair& h2) {
    return {cartan::vf_bracket(h1.xi, h2.xi),
            cartan::interior(h2.xi, cartan::interior(h1.xi, P.chi))};
}

Expr plectic_jacobiator(const PlecticManifold& P, const HamPair& h1, const HamPair& h2,
                        const HamPair& h3) {
    Form triple =
        cartan::interior(h3.xi, cartan::interior(h2.xi, cartan::interior(h1.xi, P.chi)));
    return (Expr::constant(-1.0) * triple.scalar()).normalized();
}

HamPair ham_pair_from_beta(const PlecticManifold& P, const Form& beta) {
    if (P.chi.structurally_zero()) {
        // iota_xi 0 = 0 forces beta closed; callers pass exact forms here
        return {VectorField(P.M), beta};
    }
    if (P.M.dim() != 3 || P.chi.terms().size() != 1 ||
        P.chi.terms().begin()->first != std::vector<int>{0, 1, 2})
        throw DimensionMismatch(
            "ham_pair_from_beta supports zero chi or a 3-dimensional top form");
    Expr w = P.chi.terms().begin()->second;
    Form mdb = -1.0 * cartan::exterior_d(beta);
    // iota_xi (w dx^dy^dz) = w (xi_x dy^dz - xi_y dx^dz + xi_z dx^dy)
    VectorField xi(P.M);
    xi.components[0] = (mdb.coefficient({1, 2}) / w).normalized();
    xi.components[1] = (Expr::constant(-1.0) * mdb.coefficient({0, 2}) / w).normalized();
    xi.components[2] = (mdb.coefficient({0, 1}) / w).normalized();
    return {xi, beta};
}

std::vector<HamPair> sample_ham_pairs(const PlecticManifold& P, int count, std::uint64_t seed,
                                      const std::string& context) {
    auto st = rng::derive(seed, context);
    std::vector<HamPair> out;
    for (int k = 0; k < count; ++k) {
        if (P.chi.structurally_zero()) {
            VectorField xi = cartan::random_vf(st, P.M, 2);
            Form beta = cartan::exterior_d(
                Form::from_scalar(random_polynomial(st, P.M.coords, 3), P.M));
            out.push_back({xi, beta});
        } else {
            Form beta = cartan::random_form(st, 1, P.M, 2);
            out.push_back(ham_pair_from_beta(P, beta));
        }
    }
    return out;
}

double PlecticModel::resid0(const E0& h, const std::string& label) const {
    double r = cartan::vf_residual(h.xi, ctx, label + ".xi").value;
    return std::max(r, cartan::form_residual(h.beta, ctx, label + ".beta").value);
}

double PlecticModel::resid1(const E1& f, const std::string& label) const {
    Expr n = f.normalized();
    if (n.is_zero()) return 0.0;
    return sampled_max_abs({n}, P->M, ctx, label).value;
}

} // namespace gerbecal::plectic
