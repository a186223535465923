#include "gerbecal/cech.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace gerbecal::cech {

std::string tuple_str(const std::vector<int>& idx) {
    std::ostringstream os;
    os << "(";
    for (std::size_t i = 0; i < idx.size(); ++i) {
        if (i) os << ",";
        os << idx[i] + 1; // chart numbering is 1-based in reports
    }
    os << ")";
    return os.str();
}

Cover Cover::build(Box ambient, std::vector<Box> charts) {
    Cover c;
    c.ambient = std::move(ambient);
    c.charts = std::move(charts);
    const int n = static_cast<int>(c.charts.size());
    for (const auto& ch : c.charts)
        if (!ch.same_coords(c.ambient)) throw DimensionMismatch("chart coordinates differ from ambient");

    std::vector<int> stack;
    auto gen = [&](auto&& self, int start, const std::optional<Box>& acc) -> void {
        if (!stack.empty() && acc) c.overlaps[stack] = *acc;
        if (static_cast<int>(stack.size()) == 4) return;
        for (int i = start; i < n; ++i) {
            std::optional<Box> next = acc ? acc->intersect(c.charts[static_cast<std::size_t>(i)])
                                          : std::optional<Box>(c.charts[static_cast<std::size_t>(i)]);
            if (!next) continue;
            stack.push_back(i);
            self(self, i + 1, next);
            stack.pop_back();
        }
    };
    gen(gen, 0, std::nullopt);
    return c;
}

const Box& Cover::overlap(const std::vector<int>& idx) const {
    auto it = overlaps.find(idx);
    if (it == overlaps.end())
        throw DimensionMismatch("no such overlap: " + tuple_str(idx));
    return it->second;
}

bool Cover::has_overlap(const std::vector<int>& idx) const { return overlaps.count(idx) > 0; }

std::vector<std::vector<int>> Cover::tuples(int depth) const {
    std::vector<std::vector<int>> out;
    for (const auto& [idx, box] : overlaps)
        if (static_cast<int>(idx.size()) == depth) out.push_back(idx);
    return out;
}

bool Cover::covers_ambient(int grid_per_axis) const {
    const std::size_t dim = ambient.dim();
    std::vector<int> counter(dim, 0);
    for (;;) {
        std::vector<double> x(dim);
        for (std::size_t i = 0; i < dim; ++i) {
            double f = (counter[i] + 0.5) / grid_per_axis;
            x[i] = ambient.lo[i] + f * (ambient.hi[i] - ambient.lo[i]);
        }
        bool inside = false;
        for (const auto& ch : charts)
            if (ch.contains(x)) {
                inside = true;
                break;
            }
        if (!inside) return false;
        std::size_t i = 0;
        while (i < dim && ++counter[i] == grid_per_axis) counter[i++] = 0;
        if (i == dim) break;
    }
    return true;
}

const Form& CechForm::at(const std::vector<int>& idx) const {
    auto it = parts.find(idx);
    if (it == parts.end()) throw DimensionMismatch("Cech form missing part " + tuple_str(idx));
    return it->second;
}

bool CechForm::has(const std::vector<int>& idx) const { return parts.count(idx) > 0; }

void CechForm::set(std::vector<int> idx, Form f) {
    if (!std::is_sorted(idx.begin(), idx.end()))
        throw DimensionMismatch("Cech index tuples must be increasing");
    parts[std::move(idx)] = std::move(f);
}

CechForm CechForm::zeros(const Cover& cover, int form_degree, int depth) {
    CechForm f;
    f.form_degree = form_degree;
    f.depth = depth;
    for (const auto& idx : cover.tuples(depth))
        f.parts[idx] = Form(form_degree, cover.overlap(idx));
    return f;
}

CechForm cech_delta(const Cover& cover, const CechForm& f) {
    if (f.depth + 1 > 4) throw DepthExceeded("Cech depth limited to 4");
    CechForm out;
    out.form_degree = f.form_degree;
    out.depth = f.depth + 1;
    for (const auto& idx : cover.tuples(f.depth + 1)) {
        Form acc(f.form_degree, cover.overlap(idx));
        for (std::size_t omit = 0; omit < idx.size(); ++omit) {
            std::vector<int> face;
            for (std::size_t j = 0; j < idx.size(); ++j)
                if (j != omit) face.push_back(idx[j]);
            double sign = (omit % 2 == 0) ? 1.0 : -1.0;
            acc = acc + sign * f.at(face).with_domain(cover.overlap(idx));
        }
        out.parts[idx] = acc;
    }
    return out;
}

DeligneCocycle DeligneCocycle::trivial(const Cover& cover, const Form& curving) {
    if (cover.charts.size() != 1)
        throw DimensionMismatch("trivial cocycle builder expects a single chart");
    DeligneCocycle c;
    c.phi.form_degree = 0;
    c.phi.depth = 3;
    c.A.form_degree = 1;
    c.A.depth = 2;
    c.B.form_degree = 2;
    c.B.depth = 1;
    c.B.parts[{0}] = curving.with_domain(cover.charts[0]);
    return c;
}

OverlapResidual cechform_residual(const Cover&, const CechForm& f, const VerifyCtx& ctx,
                                  const std::string& label) {
    OverlapResidual worst;
    for (const auto& [idx, form] : f.parts) {
        auto r = cartan::form_residual(form, ctx, label + tuple_str(idx));
        if (r.value >= worst.value) {
            if (r.value > worst.value || worst.overlap.empty()) {
                worst.value = r.value;
                worst.overlap = idx;
                worst.witness = r.witness;
            }
        }
    }
    return worst;
}

namespace {

// Residual of |v - round(v)| over samples, for integrality checks.
double integer_residual(const Form& f, const VerifyCtx& ctx, const std::string& context,
                        symexpr::Point* witness) {
    auto pts = sample_points(f.domain(), ctx.samples, ctx.seed, context);
    double worst = 0.0;
    for (const auto& p : pts) {
        double v = f.scalar().eval(p);
        double r = std::abs(v - std::round(v));
        if (r > worst) {
            worst = r;
            if (witness) *witness = p;
        }
    }
    return worst;
}

} // namespace

Report validate_deligne(const Cover& cover, const DeligneCocycle& c, const VerifyCtx& ctx) {
    Report rep;
    rep.suite = "deligne";

    // quadruple overlaps: delta(phi) integer valued
    for (const auto& idx : cover.tuples(4)) {
        CechForm dphi = cech_delta(cover, c.phi);
        symexpr::Point w;
        double r = integer_residual(dphi.at(idx), ctx, "deligne.phi" + tuple_str(idx), &w);
        rep.add(CheckResult::from_residual("deligne.phi_cocycle" + tuple_str(idx), r, kIntegerTol,
                                           point_str(w)));
    }

    // triple overlaps: A_jk - A_ik + A_ij = d phi_ijk
    for (const auto& idx : cover.tuples(3)) {
        const Box& box = cover.overlap(idx);
        CechForm dA = cech_delta(cover, c.A);
        Form resid = dA.at(idx) - cartan::exterior_d(c.phi.at(idx)).with_domain(box);
        auto r = cartan::form_residual(resid, ctx, "deligne.A" + tuple_str(idx));
        rep.add(CheckResult::from_residual("deligne.connection" + tuple_str(idx), r.value, ctx.tol,
                                           point_str(r.witness)));
    }

    // double overlaps: B_j - B_i = d A_ij
    for (const auto& idx : cover.tuples(2)) {
        const Box& box = cover.overlap(idx);
        Form resid = c.B.at({idx[1]}).with_domain(box) - c.B.at({idx[0]}).with_domain(box) -
                     cartan::exterior_d(c.A.at(idx)).with_domain(box);
        auto r = cartan::form_residual(resid, ctx, "deligne.B" + tuple_str(idx));
        rep.add(CheckResult::from_residual("deligne.curving" + tuple_str(idx), r.value, ctx.tol,
                                           point_str(r.witness)));
    }

    if (rep.checks.empty())
        rep.add(CheckResult::pass("deligne.vacuous", 0.0, "", "no overlaps to check"));
    rep.sort_by_id();
    return rep;
}

Form glue_chart_forms(const Cover& cover, const std::map<int, Form>& pieces, const VerifyCtx& ctx,
                      const std::string& context) {
    if (pieces.empty()) throw DimensionMismatch("nothing to glue");
    // pairwise agreement on overlaps
    for (const auto& idx : cover.tuples(2)) {
        auto i = pieces.find(idx[0]);
        auto j = pieces.find(idx[1]);
        if (i == pieces.end() || j == pieces.end())
            throw DimensionMismatch("glue: missing chart piece");
        const Box& box = cover.overlap(idx);
        Form diff = i->second.with_domain(box) - j->second.with_domain(box);
        auto r = cartan::form_residual(diff, ctx, context + ".pair" + tuple_str(idx));
        if (r.value > ctx.tol)
            throw GluingMismatch("chart forms disagree on overlap " + tuple_str(idx) + " in " +
                                     context,
                                 point_str(r.witness));
    }
    // the lowest chart's expression must extend across every chart
    const Form& candidate = pieces.begin()->second;
    for (const auto& [i, piece] : pieces) {
        const Box& chart = cover.charts[static_cast<std::size_t>(i)];
        Form diff = piece.with_domain(chart) - candidate.with_domain(chart);
        auto r = cartan::form_residual(diff, ctx, context + ".extend" + std::to_string(i));
        if (r.value > ctx.tol)
            throw GluingMismatch("no single global representative on chart " + std::to_string(i + 1) +
                                     " in " + context,
                                 point_str(r.witness));
    }
    return candidate.with_domain(cover.ambient);
}

Form three_curvature(const Cover& cover, const DeligneCocycle& c, const VerifyCtx& ctx) {
    std::map<int, Form> dB;
    for (const auto& [idx, B] : c.B.parts) dB[idx[0]] = cartan::exterior_d(B);
    return glue_chart_forms(cover, dB, ctx, "three_curvature");
}

Report validate_trivialization(const Cover& cover, const DeligneCocycle& c,
                               const Trivialization& t, const VerifyCtx& ctx) {
    Report rep;
    rep.suite = "trivialization";

    // triple overlaps: delta(psi) - phi integer valued
    for (const auto& idx : cover.tuples(3)) {
        CechForm dpsi = cech_delta(cover, t.psi);
        Form resid = dpsi.at(idx) - c.phi.at(idx).with_domain(cover.overlap(idx));
        symexpr::Point w;
        double r = integer_residual(resid, ctx, "triv.psi" + tuple_str(idx), &w);
        rep.add(CheckResult::from_residual("trivialization.phase" + tuple_str(idx), r, kIntegerTol,
                                           point_str(w)));
    }

    // double overlaps: eta_j - eta_i = A_ij + d psi_ij
    for (const auto& idx : cover.tuples(2)) {
        const Box& box = cover.overlap(idx);
        Form resid = t.eta.at({idx[1]}).with_domain(box) - t.eta.at({idx[0]}).with_domain(box) -
                     c.A.at(idx).with_domain(box);
        if (t.psi.has(idx)) resid = resid - cartan::exterior_d(t.psi.at(idx)).with_domain(box);
        auto r = cartan::form_residual(resid, ctx, "triv.eta" + tuple_str(idx));
        rep.add(CheckResult::from_residual("trivialization.connection" + tuple_str(idx), r.value,
                                           ctx.tol, point_str(r.witness)));
    }

    // charts: B_i - d eta_i = omega
    for (const auto& [idx, B] : c.B.parts) {
        const Box& chart = cover.charts[static_cast<std::size_t>(idx[0])];
        Form resid = B - cartan::exterior_d(t.eta.at(idx)) - t.omega.with_domain(chart);
        auto r = cartan::form_residual(resid, ctx, "triv.omega" + tuple_str(idx));
        rep.add(CheckResult::from_residual("trivialization.error_form" + tuple_str(idx), r.value,
                                           ctx.tol, point_str(r.witness)));
    }
    rep.sort_by_id();
    return rep;
}

CechForm cechform_add(const CechForm& a, const CechForm& b) {
    if (a.form_degree != b.form_degree || a.depth != b.depth)
        throw DimensionMismatch("adding incompatible Cech forms");
    CechForm out = a;
    for (const auto& [idx, f] : b.parts) {
        auto it = out.parts.find(idx);
        if (it == out.parts.end())
            out.parts[idx] = f;
        else
            it->second = it->second + f;
    }
    return out;
}

CechForm cechform_scale(double c, const CechForm& a) {
    CechForm out = a;
    for (auto& [idx, f] : out.parts) f = c * f;
    return out;
}

} // namespace gerbecal::cech
