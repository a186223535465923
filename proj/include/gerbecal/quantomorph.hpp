#pragma once

#include <Eigen/Dense>

#include "gerbecal/gerbevf.hpp"
#include "gerbecal/lie2.hpp"
#include "gerbecal/plectic.hpp"

namespace gerbecal::quantomorph {

using cartan::Form;
using cartan::VectorField;
using cech::CechForm;
using cech::Cover;
using cech::DeligneCocycle;
using cech::Trivialization;
using gerbevf::AlgebroidSection;
using gerbevf::ConnMultVF;
using gerbevf::TrivPair;
using plectic::HamPair;
using plectic::PlecticManifold;
using symexpr::Expr;

/// Carrier element (xi, {f_ij}, {a_i}; {g_i}) with the constraint
/// g_j - g_i = iota_xi A_ij + f_ij on double overlaps.
struct EElement {
    ConnMultVF v;
    CechForm g; // (0, 1)

    static EElement zero(const Cover& cover);
    friend EElement operator+(const EElement& a, const EElement& b);
    friend EElement operator*(double c, const EElement& a);
};

/// Geometric butterfly with constructive exactness witnesses.  Two flavours
/// share the carrier: the prequantization span onto the Poisson Lie
/// 2-algebra of the 3-curvature, and the trivialization span onto the
/// trivial-gerbe instance of the error 2-form.
class GerbeButterfly {
public:
    enum class Kind { Prequantization, Trivialization };

    /// Prequantization butterfly; requires three_curvature(c) = P.chi.
    static GerbeButterfly build_E(const Cover& cover, const DeligneCocycle& c,
                                  const PlecticManifold& P, const VerifyCtx& ctx);
    /// Trivialization butterfly; requires validate_trivialization to pass.
    static GerbeButterfly build_Q(const Cover& cover, const DeligneCocycle& c,
                                  const Trivialization& t, const VerifyCtx& ctx);

    Kind kind() const { return kind_; }
    const Cover& cover() const { return *cover_; }
    const DeligneCocycle& cocycle() const { return *coc_; }
    const PlecticManifold& plectic() const { return plectic_; }
    const gerbevf::TrivGerbeModel& triv_model() const { return triv_model_; }

    EElement kappa(const Expr& h) const;
    EElement lambda(const AlgebroidSection& u) const;
    ConnMultVF rho(const EElement& e) const { return e.v; }

    /// sigma for the prequantization flavour: (xi, -eps) with
    /// eps|U_i = a_i - iota_xi B_i - d g_i, glued over the cover.
    HamPair sigma_E(const EElement& e) const;
    /// sigma for the trivialization flavour: (xi, A) with
    /// A|U_i = a_i - iota_xi d eta_i - d g_i, glued.
    TrivPair sigma_Q(const EElement& e) const;

    EElement bracket(const EElement& a, const EElement& b) const;

    /// Constructive section of sigma (surjectivity witness); the round trip
    /// sigma(section(h)) = h holds exactly.
    EElement sigma_section(const HamPair& h) const;     // prequantization
    EElement sigma_section_w(const TrivPair& w) const;  // trivialization

    /// Constructive preimage under lambda for sigma-kernel elements; throws
    /// NotInKernel when sigma(e) is nonzero on samples.
    AlgebroidSection lambda_kernel_witness(const EElement& e, double* residual = nullptr) const;

    /// Carrier-constraint plus connection-preservation residual.
    double element_residual(const EElement& e, const std::string& label) const;
    double carrier_residual(const EElement& e, const std::string& label) const;

    EElement sample_element(rng::Stream& st, const std::string& tag) const;

    VerifyCtx ctx;

private:
    Kind kind_ = Kind::Prequantization;
    const Cover* cover_ = nullptr;
    const DeligneCocycle* coc_ = nullptr;
    const Trivialization* triv_ = nullptr;
    PlecticManifold plectic_;              // source data for build_E
    gerbevf::TrivGerbeModel triv_model_;   // source data for build_Q
    CechForm curvQ_;                       // d eta_i per chart (build_Q)
};

/// Full butterfly verification with the constructive witnesses standing in
/// for rank arguments.  `samples` controls how many carrier elements are
/// drawn for the bracket laws.
Report check_geometric_butterfly(const GerbeButterfly& b, const VerifyCtx& ctx,
                                 const std::string& prefix, int samples = 6);

/// The canonical 2-isomorphism from the composite (trivialization after the
/// trivial-gerbe prequantization) onto the direct prequantization butterfly:
/// [(xi,A,f; xi,f,alpha;g)] -> (xi,f,alpha; g + pullback f).  Verifies
/// quotient invariance, structure-map and bracket commutation on sampled
/// composite elements.
Report two_iso_phi(const GerbeButterfly& bE_triv, const GerbeButterfly& bQ,
                   const GerbeButterfly& bE, const VerifyCtx& ctx, int samples = 8,
                   const std::string& prefix = "two_iso");

// ---------------------------------------------------------------------------
// Kostant lift on a trivial prequantum circle bundle.

struct KostantLift {
    VectorField hamiltonian_field; // X_f with iota_{X_f} omega = -df
    Expr vertical;                 // fibre speed f - iota_{X_f} A
    double connection_pairing_residual = 0.0; // | iota_X gamma - f |
    double quantomorphism_residual = 0.0;     // | L_X gamma |
};

/// Lift of a Hamiltonian function to a connection-preserving field on
/// M x S^1 with gamma = A + dtheta, dA = omega.  Supported in dimensions
/// <= 3 (symbolic Cramer solve); NoHamiltonianField when omega degenerates
/// on samples.
KostantLift kostant_lift(const Box& M, const Form& omega, const Form& A, const Expr& f,
                         const VerifyCtx& ctx);

// ---------------------------------------------------------------------------
// Group-valued moment map data.

struct GroupModel {
    Box patch;
    std::vector<Form> theta_left;   // per Lie algebra basis index
    std::vector<Form> theta_right;
    Form eta; // Cartan 3-form on the patch
    Eigen::MatrixXd inner;
    std::vector<Eigen::MatrixXd> structure; // c[i](j,k), may be empty for abelian

    int dim() const { return static_cast<int>(theta_left.size()); }
    Report validate(const VerifyCtx& ctx) const;
};

struct QHamData {
    Box M;
    Form omega;                        // invariant 2-form
    std::vector<Expr> moment;          // coordinates of Phi : M -> patch
    std::vector<VectorField> generators; // xi_M per basis index
};

/// Pullback along the coordinate map with components `map` (target
/// coordinates of `f.domain()` order).
Form pullback(const Form& f, const std::vector<Expr>& map, const Box& target);

Report validate_qham(const GroupModel& G, const QHamData& D, const VerifyCtx& ctx);

/// Square compatibility: the trivialization butterfly after the
/// trivial-gerbe prequantization agrees with the prequantization of the
/// pulled-back gerbe; with a moment map, the lifted triangle is transported
/// through the 2-isomorphism.
Report check_square(const GroupModel& G, const QHamData& D, const GerbeButterfly& bE_triv,
                    const GerbeButterfly& bE_gerbe, const GerbeButterfly& bQ,
                    const std::vector<HamPair>& moment_pairs, const VerifyCtx& ctx);

} // namespace gerbecal::quantomorph
