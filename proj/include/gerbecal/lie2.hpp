#pragma once

#include <Eigen/Dense>
#include <array>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "gerbecal/report.hpp"
#include "gerbecal/sampling.hpp"

namespace gerbecal::lie2 {

// ---------------------------------------------------------------------------
// Generic checkers.  A model supplies the structure maps of a 2-term
// complex with bracket and Jacobiator plus a sampled residual oracle:
//
//   using E0 = ...; using E1 = ...;
//   E0 d(E1);  E0 b00(E0,E0);  E1 b01(E0,E1);  E1 jac(E0,E0,E0);
//   E0 add0(E0,E0); E0 scale0(double,E0); (same in degree 1)
//   double resid0(E0, label); double resid1(E1, label);
//
// The same interface serves dense numeric instances and the geometric
// function-space instances, whose residuals are sampled point evaluations.

template <class M>
Report check_lie2_axioms(const M& m, const std::vector<typename M::E0>& e0,
                         const std::vector<typename M::E1>& e1, const VerifyCtx& ctx,
                         const std::string& prefix) {
    if (e0.size() < 4 || e1.size() < 2)
        throw PreconditionFailed("check_lie2_axioms needs >= 4 degree-0 and >= 2 degree-1 samples");
    Report rep;
    rep.suite = prefix;
    auto sub0 = [&](const typename M::E0& a, const typename M::E0& b) {
        return m.add0(a, m.scale0(-1.0, b));
    };
    auto sub1 = [&](const typename M::E1& a, const typename M::E1& b) {
        return m.add1(a, m.scale1(-1.0, b));
    };

    double skew = 0, chain1 = 0, chain2 = 0, hj0 = 0, hj1 = 0, jskew = 0, coher = 0;

    const std::size_t n0 = e0.size(), n1 = e1.size();
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = i; j < n0; ++j) {
            skew = std::max(skew, m.resid0(m.add0(m.b00(e0[i], e0[j]), m.b00(e0[j], e0[i])),
                                           prefix + ".skew"));
        }
    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t a = 0; a < n1; ++a) {
            chain1 = std::max(
                chain1, m.resid0(sub0(m.d(m.b01(e0[i], e1[a])), m.b00(e0[i], m.d(e1[a]))),
                                 prefix + ".chain1"));
        }
    for (std::size_t a = 0; a < n1; ++a)
        for (std::size_t b = a; b < n1; ++b) {
            chain2 = std::max(chain2,
                              m.resid1(m.add1(m.b01(m.d(e1[a]), e1[b]), m.b01(m.d(e1[b]), e1[a])),
                                       prefix + ".chain2"));
        }

    // unordered tuples suffice: permuted instances follow from the
    // bracket/Jacobiator skew checks run alongside
    auto triples = [&](auto&& fn) {
        for (std::size_t i = 0; i < n0; ++i)
            for (std::size_t j = i; j < n0; ++j)
                for (std::size_t k = j; k < n0; ++k) fn(e0[i], e0[j], e0[k]);
    };

    triples([&](const auto& x, const auto& y, const auto& z) {
        // d J(x,y,z) = [x,[y,z]] - [[x,y],z] - [y,[x,z]]
        auto rhs = sub0(m.b00(x, m.b00(y, z)),
                        m.add0(m.b00(m.b00(x, y), z), m.b00(y, m.b00(x, z))));
        hj0 = std::max(hj0, m.resid0(sub0(m.d(m.jac(x, y, z)), rhs), prefix + ".hjac0"));
        jskew = std::max(jskew, m.resid1(m.add1(m.jac(x, y, z), m.jac(y, x, z)), prefix + ".jskew"));
        jskew = std::max(jskew, m.resid1(m.add1(m.jac(x, y, z), m.jac(x, z, y)), prefix + ".jskew"));
    });

    for (std::size_t i = 0; i < n0; ++i)
        for (std::size_t j = i; j < n0; ++j)
            for (std::size_t a = 0; a < n1; ++a) {
                // J(x,y,da) = [x,[y,a]] - [[x,y],a] - [y,[x,a]]
                const auto& x = e0[i];
                const auto& y = e0[j];
                auto rhs = sub1(m.b01(x, m.b01(y, e1[a])),
                                m.add1(m.b01(m.b00(x, y), e1[a]), m.b01(y, m.b01(x, e1[a]))));
                hj1 = std::max(hj1,
                               m.resid1(sub1(m.jac(x, y, m.d(e1[a])), rhs), prefix + ".hjac1"));
            }

    // quartic coherence law on sampled quadruples
    {
        std::vector<std::array<std::size_t, 4>> quads;
        if (n0 * n0 * n0 * n0 <= 4096) {
            for (std::size_t i = 0; i < n0; ++i)
                for (std::size_t j = i; j < n0; ++j)
                    for (std::size_t k = j; k < n0; ++k)
                        for (std::size_t l = k; l < n0; ++l) quads.push_back({i, j, k, l});
        } else {
            auto st = rng::derive(ctx.seed, prefix + ".quads");
            for (int t = 0; t < 64; ++t)
                quads.push_back({static_cast<std::size_t>(st.uniform_int(0, static_cast<int>(n0) - 1)),
                                 static_cast<std::size_t>(st.uniform_int(0, static_cast<int>(n0) - 1)),
                                 static_cast<std::size_t>(st.uniform_int(0, static_cast<int>(n0) - 1)),
                                 static_cast<std::size_t>(st.uniform_int(0, static_cast<int>(n0) - 1))});
        }
        for (auto [i, j, k, l] : quads) {
            const auto& x = e0[i];
            const auto& y = e0[j];
            const auto& z = e0[k];
            const auto& w = e0[l];
            // [x,J(y,z,w)] + J(x,[y,z],w) + J(x,z,[y,w]) + [J(x,y,z),w] + [z,J(x,y,w)]
            auto lhs = m.add1(m.b01(x, m.jac(y, z, w)), m.jac(x, m.b00(y, z), w));
            lhs = m.add1(lhs, m.jac(x, z, m.b00(y, w)));
            lhs = m.add1(lhs, m.scale1(-1.0, m.b01(w, m.jac(x, y, z))));
            lhs = m.add1(lhs, m.b01(z, m.jac(x, y, w)));
            // J(x,y,[z,w]) + J([x,y],z,w) + [y,J(x,z,w)] + J(y,[x,z],w) + J(y,z,[x,w])
            auto rhs = m.add1(m.jac(x, y, m.b00(z, w)), m.jac(m.b00(x, y), z, w));
            rhs = m.add1(rhs, m.b01(y, m.jac(x, z, w)));
            rhs = m.add1(rhs, m.jac(y, m.b00(x, z), w));
            rhs = m.add1(rhs, m.jac(y, z, m.b00(x, w)));
            coher = std::max(coher, m.resid1(sub1(lhs, rhs), prefix + ".coherence"));
        }
    }

    rep.add(CheckResult::from_residual(prefix + ".bracket_skew", skew, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".chain_map_mixed", chain1, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".chain_map_images", chain2, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".homotopy_jacobi_deg0", hj0, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".homotopy_jacobi_deg1", hj1, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".jacobiator_skew", jskew, ctx.tol));
    rep.add(CheckResult::from_residual(prefix + ".coherence_law", coher, ctx.tol));
    rep.sort_by_id();
    return rep;
}

/// Morphism data between two models; F2 is the bracket-controlling
/// homotopy with the orientation d(F2(x,y)) = F0([x,y]) - [F0 x, F0 y].
template <class MS, class MT>
struct Morphism {
    std::function<typename MT::E0(const typename MS::E0&)> F0;
    std::function<typename MT::E1(const typename MS::E1&)> F1;
    std::function<typename MT::E1(const typename MS::E0&, const typename MS::E0&)> F2;
};

template <class MS, class MT>
Report check_morphism(const MS& ms, const MT& mt, const Morphism<MS, MT>& F,
                      const std::vector<typename MS::E0>& e0,
                      const std::vector<typename MS::E1>& e1, const VerifyCtx& ctx,
                      const std::string& prefix) {
    Report rep;
    rep.suite = prefix;
    auto sub0 = [&](const typename MT::E0& a, const typename MT::E0& b) {
        return mt.add0(a, mt.scale0(-1.0, b));
    };
    auto sub1 = [&](const typename MT::E1& a, const typename MT::E1& b) {
        return mt.add1(a, mt.scale1(-1.0, b));
    };

    double chain = 0;
    for (const auto& a : e1)
        chain = std::max(chain,
                         mt.resid0(sub0(F.F0(ms.d(a)), mt.d(F.F1(a))), prefix + ".chain"));
    rep.add(CheckResult::from_residual(prefix + ".chain_map", chain, ctx.tol));

    double h0 = 0;
    for (const auto& x : e0)
        for (const auto& y : e0) {
            auto want = sub0(F.F0(ms.b00(x, y)), mt.b00(F.F0(x), F.F0(y)));
            h0 = std::max(h0, mt.resid0(sub0(want, mt.d(F.F2(x, y))), prefix + ".h0"));
        }
    rep.add(CheckResult::from_residual(prefix + ".homotopy_deg0", h0, ctx.tol));

    double h1 = 0;
    for (const auto& x : e0)
        for (const auto& a : e1) {
            auto want = sub1(F.F1(ms.b01(x, a)), mt.b01(F.F0(x), F.F1(a)));
            h1 = std::max(h1, mt.resid1(sub1(want, F.F2(x, ms.d(a))), prefix + ".h1"));
        }
    rep.add(CheckResult::from_residual(prefix + ".homotopy_deg1", h1, ctx.tol));

    double jc = 0;
    for (std::size_t i = 0; i < e0.size(); ++i)
        for (std::size_t j = 0; j < e0.size(); ++j)
            for (std::size_t k = 0; k < e0.size(); ++k) {
                const auto& x = e0[i];
                const auto& y = e0[j];
                const auto& z = e0[k];
                auto lhs = sub1(F.F1(ms.jac(x, y, z)), mt.jac(F.F0(x), F.F0(y), F.F0(z)));
                auto rhs = sub1(F.F2(x, ms.b00(y, z)), F.F2(ms.b00(x, y), z));
                rhs = sub1(rhs, F.F2(y, ms.b00(x, z)));
                // -[F2(x,y), F0 z] = +[F0 z, F2(x,y)]
                rhs = mt.add1(rhs, mt.b01(F.F0(z), F.F2(x, y)));
                rhs = mt.add1(rhs, mt.b01(F.F0(x), F.F2(y, z)));
                rhs = sub1(rhs, mt.b01(F.F0(y), F.F2(x, z)));
                jc = std::max(jc, mt.resid1(sub1(lhs, rhs), prefix + ".jac"));
            }
    rep.add(CheckResult::from_residual(prefix + ".jacobiator_transport", jc, ctx.tol));
    rep.sort_by_id();
    return rep;
}

// ---------------------------------------------------------------------------
// Dense numeric instances.

/// 2-term complex with dense structure tensors.  b00[i](j,k) is the
/// e_i-coefficient of [e_j, e_k]; b01[i](j,k) the f_i-coefficient of
/// [e_j, f_k]; jac is fully antisymmetric in its three degree-0 slots.
struct FinDimLie2 {
    int n1 = 0, n0 = 0;
    Eigen::MatrixXd d;                  // n0 x n1
    std::vector<Eigen::MatrixXd> b00;   // n0 of (n0 x n0)
    std::vector<Eigen::MatrixXd> b01;   // n1 of (n0 x n1)
    std::vector<double> jtensor;        // n1 * n0^3

    Eigen::VectorXd bracket00(const Eigen::VectorXd& x, const Eigen::VectorXd& y) const;
    Eigen::VectorXd bracket01(const Eigen::VectorXd& x, const Eigen::VectorXd& a) const;
    Eigen::VectorXd jac(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                        const Eigen::VectorXd& z) const;
    double& jref(int i, int j, int k, int l);
    double jval(int i, int j, int k, int l) const;

    /// [0 -> g] for structure constants c[i](j,k).
    static FinDimLie2 from_lie_algebra(const std::vector<Eigen::MatrixXd>& c);
    static FinDimLie2 so3();
    /// Basis change x -> P x of degree 0 (valid for n1 = 0 instances).
    static FinDimLie2 conjugated(const FinDimLie2& g, const Eigen::MatrixXd& P);
    /// Crossed module [g --id--> g] with adjoint action.
    static FinDimLie2 adjoint_crossed_module(const FinDimLie2& g);
    /// V0 = R^3 with the cross product, V1 = R, d = 0, J(x,y,z) = x.(y x z).
    static FinDimLie2 string_type();
};

struct FinDimModel {
    const FinDimLie2* L;
    using E0 = Eigen::VectorXd;
    using E1 = Eigen::VectorXd;
    E0 d(const E1& a) const {
        if (!L->n1) return Eigen::VectorXd::Zero(L->n0);
        return L->d * a;
    }
    E0 b00(const E0& x, const E0& y) const { return L->bracket00(x, y); }
    E1 b01(const E0& x, const E1& a) const { return L->bracket01(x, a); }
    E1 jac(const E0& x, const E0& y, const E0& z) const { return L->jac(x, y, z); }
    E0 add0(const E0& a, const E0& b) const { return a + b; }
    E0 scale0(double c, const E0& a) const { return c * a; }
    E1 add1(const E1& a, const E1& b) const { return a + b; }
    E1 scale1(double c, const E1& a) const { return c * a; }
    double resid0(const E0& a, const std::string&) const {
        return a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
    }
    double resid1(const E1& a, const std::string&) const {
        return a.size() ? a.cwiseAbs().maxCoeff() : 0.0;
    }
};

std::vector<Eigen::VectorXd> random_vectors(int dim, int count, rng::Stream& st);

// ---------------------------------------------------------------------------
// Butterflies between dense instances.

/// Span E with bracket and the four structure maps of a butterfly
/// src -/-> tgt; kappa/lambda map into E, sigma/rho project out.
struct FinDimButterfly {
    const FinDimLie2* src = nullptr;
    const FinDimLie2* tgt = nullptr;
    int dimE = 0;
    Eigen::MatrixXd kappa;  // dimE x src.n1
    Eigen::MatrixXd lambda; // dimE x tgt.n1
    Eigen::MatrixXd sigma;  // src.n0 x dimE
    Eigen::MatrixXd rho;    // tgt.n0 x dimE
    std::vector<Eigen::MatrixXd> bracket; // dimE of (dimE x dimE)

    Eigen::VectorXd br(const Eigen::VectorXd& a, const Eigen::VectorXd& b) const;
};

/// All four defining conditions plus short-exactness of the NE-SW wing
/// (rank arguments); `invertible` additionally checks the NW-SE wing.
Report check_butterfly(const FinDimButterfly& b, const VerifyCtx& ctx, const std::string& prefix,
                       bool expect_invertible = false);

/// Strict morphism (F2 optional) as a butterfly with carrier U0 + V1.
struct FinDimMorphism {
    const FinDimLie2* src = nullptr;
    const FinDimLie2* tgt = nullptr;
    Eigen::MatrixXd F0; // tgt.n0 x src.n0
    Eigen::MatrixXd F1; // tgt.n1 x src.n1
    std::vector<Eigen::MatrixXd> F2; // tgt.n1 of (src.n0 x src.n0), may be empty
};

FinDimButterfly butterfly_of_morphism(const FinDimMorphism& f);
FinDimButterfly identity_butterfly(const FinDimLie2& V);
FinDimButterfly flip(const FinDimButterfly& b);

/// Noohi composition: fibred sum over the middle degree-0 space modulo the
/// image of the middle degree-1 space under (lambda, kappa').
FinDimButterfly compose_butterflies(const FinDimButterfly& b1, const FinDimButterfly& b2);

/// Structure-map-commuting linear map E1 -> E2, when one exists; linear
/// feasibility at least-squares residual <= 1e-8, bracket preservation
/// verified on samples.
std::optional<Eigen::MatrixXd> find_2iso(const FinDimButterfly& b1, const FinDimButterfly& b2,
                                         const VerifyCtx& ctx);

} // namespace gerbecal::lie2
