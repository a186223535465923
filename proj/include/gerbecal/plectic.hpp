#pragma once

#include "gerbecal/cartan.hpp"
#include "gerbecal/report.hpp"

namespace gerbecal::plectic {

using cartan::Form;
using cartan::VectorField;
using symexpr::Expr;

/// Box manifold with a closed 3-form; non-degeneracy is never required.
struct PlecticManifold {
    Box M;
    Form chi; // degree 3

    /// dchi = 0 on samples.
    double closedness_residual(const VerifyCtx& ctx) const;
};

/// Degree-0 element: (xi, beta) with iota_xi chi = -d beta.
struct HamPair {
    VectorField xi;
    Form beta; // degree 1

    static HamPair zero(const Box& M);
    friend HamPair operator+(const HamPair& a, const HamPair& b);
    friend HamPair operator*(double c, const HamPair& a);
};

double validate_ham_pair(const PlecticManifold& P, const HamPair& h, const VerifyCtx& ctx,
                         const std::string& context = "ham_pair");

/// d f = (0, df).
HamPair plectic_d(const PlecticManifold& P, const Expr& f);

/// [(xi1,b1),(xi2,b2)] = ([xi1,xi2], iota_{xi2} iota_{xi1} chi).
HamPair plectic_bracket(const PlecticManifold& P, const HamPair& h1, const HamPair& h2);

/// J(h1,h2,h3) = -iota_{xi3} iota_{xi2} iota_{xi1} chi.
Expr plectic_jacobiator(const PlecticManifold& P, const HamPair& h1, const HamPair& h2,
                        const HamPair& h3);

/// Hamiltonian pair with a prescribed potential 1-form.  Supported when chi
/// is zero (any closed beta works) or a 3-dimensional top form; these cover
/// the shipped fixtures.
HamPair ham_pair_from_beta(const PlecticManifold& P, const Form& beta);

std::vector<HamPair> sample_ham_pairs(const PlecticManifold& P, int count, std::uint64_t seed,
                                      const std::string& context);

/// Lie-2 model interface over (M, chi).
struct PlecticModel {
    const PlecticManifold* P;
    VerifyCtx ctx;

    using E0 = HamPair;
    using E1 = Expr;

    E0 d(const E1& f) const { return plectic_d(*P, f); }
    E0 b00(const E0& x, const E0& y) const { return plectic_bracket(*P, x, y); }
    E1 b01(const E0&, const E1&) const { return Expr(); } // mixed brackets vanish
    E1 jac(const E0& x, const E0& y, const E0& z) const {
        return plectic_jacobiator(*P, x, y, z);
    }
    E0 add0(const E0& a, const E0& b) const { return a + b; }
    E0 scale0(double c, const E0& a) const { return c * a; }
    E1 add1(const E1& a, const E1& b) const { return (a + b).normalized(); }
    E1 scale1(double c, const E1& a) const { return (Expr::constant(c) * a).normalized(); }
    double resid0(const E0& h, const std::string& label) const;
    double resid1(const E1& f, const std::string& label) const;
};

} // namespace gerbecal::plectic
