#pragma once

#include <map>
#include <optional>
#include <vector>

#include "gerbecal/cartan.hpp"
#include "gerbecal/report.hpp"
#include "gerbecal/sampling.hpp"

namespace gerbecal::cech {

using cartan::Form;
using cartan::VectorField;
using symexpr::Expr;

/// Open cover of a box manifold by sub-boxes, with the nonempty ordered
/// overlaps precomputed up to depth 4.
struct Cover {
    Box ambient;
    std::vector<Box> charts;
    std::map<std::vector<int>, Box> overlaps; // increasing index tuples, sizes 1..4

    static Cover build(Box ambient, std::vector<Box> charts);

    const Box& overlap(const std::vector<int>& idx) const;
    bool has_overlap(const std::vector<int>& idx) const;
    std::vector<std::vector<int>> tuples(int depth) const;

    /// Every grid point of the ambient box must lie in some chart.
    bool covers_ambient(int grid_per_axis = 6) const;
};

/// Assignment of a degree-k form to every ordered p-fold overlap.
struct CechForm {
    int form_degree = 0;
    int depth = 1;
    std::map<std::vector<int>, Form> parts;

    const Form& at(const std::vector<int>& idx) const;
    bool has(const std::vector<int>& idx) const;
    void set(std::vector<int> idx, Form f);

    static CechForm zeros(const Cover& cover, int form_degree, int depth);
};

/// Simplicial differential: alternating sum of restrictions with one index
/// omitted.  On chart functions this reads (delta g)_{ij} = g_j - g_i.
CechForm cech_delta(const Cover& cover, const CechForm& f);

/// Deligne 2-cocycle data: real phases phi_{ijk} (g = e^{2 pi i phi}),
/// connection 1-forms A_{ij}, curvings B_i.
struct DeligneCocycle {
    CechForm phi; // (0,3)
    CechForm A;   // (1,2)
    CechForm B;   // (2,1)

    /// Single-chart presentation of the trivial gerbe with curving `omega`.
    static DeligneCocycle trivial(const Cover& cover, const Form& curving);
};

struct Trivialization {
    CechForm psi; // (0,2)
    CechForm eta; // (1,1)
    Form omega;   // error 2-form on the ambient box
};

/// Integer-valuedness tolerance for phase checks.
inline constexpr double kIntegerTol = 1e-6;

Report validate_deligne(const Cover& cover, const DeligneCocycle& c, const VerifyCtx& ctx);

/// Per-chart dB_i glued to a global closed 3-form.  Verifies agreement on
/// overlaps and that the representative extends across every chart;
/// GluingMismatch carries the witness overlap/point.
Form three_curvature(const Cover& cover, const DeligneCocycle& c, const VerifyCtx& ctx);

Report validate_trivialization(const Cover& cover, const DeligneCocycle& c,
                               const Trivialization& t, const VerifyCtx& ctx);

/// Glue per-chart forms into one global form (same verification policy as
/// three_curvature).
Form glue_chart_forms(const Cover& cover, const std::map<int, Form>& pieces, const VerifyCtx& ctx,
                      const std::string& context);

/// Max residual of a Cech form over sampled points of every overlap of its
/// depth; `label` prefixes the context used for sampling streams.
struct OverlapResidual {
    double value = 0.0;
    std::vector<int> overlap;
    symexpr::Point witness;
};
OverlapResidual cechform_residual(const Cover& cover, const CechForm& f, const VerifyCtx& ctx,
                                  const std::string& label);

std::string tuple_str(const std::vector<int>& idx);

CechForm cechform_add(const CechForm& a, const CechForm& b);
CechForm cechform_scale(double c, const CechForm& a);

} // namespace gerbecal::cech
