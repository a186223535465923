#include "gerbecal/bundle.hpp"

#include <fstream>
#include <json.hpp>
#include <sstream>

namespace gerbecal::bundle {

using nlohmann::json;
using symexpr::Expr;

namespace {

const json& need(const json& j, const std::string& key, const std::string& path) {
    auto it = j.find(key);
    if (it == j.end()) throw SchemaError(path);
    return *it;
}

Expr parse_payload_expr(const std::string& text, const std::string& path) {
    try {
        return symexpr::parse_expr(text);
    } catch (const ParseError& e) {
        throw ParseError(path + ": " + e.what(), e.offset);
    }
}

Box parse_box(const json& j, const std::vector<std::string>& coords, const std::string& path) {
    if (!j.is_array() || j.size() != coords.size()) throw SchemaError(path);
    Box b;
    b.coords = coords;
    for (const auto& iv : j) {
        if (!iv.is_array() || iv.size() != 2) throw SchemaError(path);
        b.lo.push_back(iv[0].get<double>());
        b.hi.push_back(iv[1].get<double>());
    }
    return b;
}

cartan::Form parse_form(const json& j, const Box& domain, const std::string& path) {
    if (!j.is_object() || !j.contains("degree")) throw SchemaError(path + ".degree");
    cartan::Form f(j["degree"].get<int>(), domain);
    if (j.contains("terms")) {
        for (std::size_t t = 0; t < j["terms"].size(); ++t) {
            const auto& term = j["terms"][t];
            std::string tp = path + ".terms[" + std::to_string(t) + "]";
            if (!term.contains("indices") || !term.contains("coefficient"))
                throw SchemaError(tp);
            std::vector<int> idx;
            for (const auto& v : term["indices"]) idx.push_back(v.get<int>());
            f.add_term(idx, parse_payload_expr(term["coefficient"].get<std::string>(),
                                               tp + ".coefficient"));
        }
    }
    return f;
}

cartan::VectorField parse_vf(const json& j, const Box& domain, const std::string& path) {
    cartan::VectorField v(domain);
    if (!j.is_object()) throw SchemaError(path);
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool found = false;
        for (std::size_t i = 0; i < domain.coords.size(); ++i) {
            if (domain.coords[i] == it.key()) {
                v.components[i] = parse_payload_expr(it.value().get<std::string>(),
                                                     path + "." + it.key());
                found = true;
            }
        }
        if (!found) throw SchemaError(path + "." + it.key());
    }
    return v;
}

std::vector<int> parse_chart_tuple(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw SchemaError(path);
    std::vector<int> idx;
    for (const auto& v : j) idx.push_back(v.get<int>() - 1); // files are 1-based
    return idx;
}

// Entries [{"idx": [...], "form"/"value": ...}] into a Cech form.
cech::CechForm parse_cechform(const json& j, const cech::Cover& cover, int degree, int depth,
                              const std::string& path) {
    cech::CechForm f;
    f.form_degree = degree;
    f.depth = depth;
    if (j.is_null()) return f;
    for (std::size_t t = 0; t < j.size(); ++t) {
        const auto& entry = j[t];
        std::string ep = path + "[" + std::to_string(t) + "]";
        std::vector<int> idx = parse_chart_tuple(need(entry, "idx", ep + ".idx"), ep + ".idx");
        const Box& box = cover.overlap(idx);
        if (entry.contains("form")) {
            f.set(idx, parse_form(entry["form"], box, ep + ".form"));
        } else if (entry.contains("value")) {
            f.set(idx, cartan::Form::from_scalar(
                           parse_payload_expr(entry["value"].get<std::string>(), ep + ".value"),
                           box));
        } else {
            throw SchemaError(ep + ".form");
        }
    }
    return f;
}

} // namespace

GeometryBundle load_bundle_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("bundle: ") + e.what(), e.byte);
    }

    GeometryBundle b;

    const json& man = need(j, "manifold", "manifold");
    std::vector<std::string> coords;
    for (const auto& c : need(man, "coords", "manifold.coords")) coords.push_back(c.get<std::string>());
    Box ambient = parse_box(need(man, "box", "manifold.box"), coords, "manifold.box");

    std::vector<Box> charts;
    for (const auto& cb : need(j, "cover", "cover"))
        charts.push_back(parse_box(cb, coords, "cover"));
    b.cover = cech::Cover::build(ambient, charts);

    const json& del = need(j, "deligne", "deligne");
    b.deligne.phi = parse_cechform(del.contains("phi") ? del["phi"] : json(), b.cover, 0, 3,
                                   "deligne.phi");
    b.deligne.A = parse_cechform(del.contains("A") ? del["A"] : json(), b.cover, 1, 2, "deligne.A");
    b.deligne.B = parse_cechform(need(del, "B", "deligne.B"), b.cover, 2, 1, "deligne.B");
    for (const auto& idx : b.cover.tuples(1))
        if (!b.deligne.B.has(idx)) throw SchemaError("deligne.B(" + std::to_string(idx[0] + 1) + ")");
    for (const auto& idx : b.cover.tuples(2))
        if (!b.deligne.A.has(idx)) throw SchemaError("deligne.A" + cech::tuple_str(idx));

    if (j.contains("trivialization")) {
        const json& tj = j["trivialization"];
        cech::Trivialization t;
        t.psi = parse_cechform(tj.contains("psi") ? tj["psi"] : json(), b.cover, 0, 2,
                               "trivialization.psi");
        t.eta = parse_cechform(need(tj, "eta", "trivialization.eta"), b.cover, 1, 1,
                               "trivialization.eta");
        t.omega = parse_form(need(tj, "omega", "trivialization.omega"), ambient,
                             "trivialization.omega");
        b.trivialization = std::move(t);
    }

    if (j.contains("plectic_form"))
        b.plectic_form = parse_form(j["plectic_form"], ambient, "plectic_form");

    if (j.contains("mult_vf")) {
        const json& mj = j["mult_vf"];
        gerbevf::ConnMultVF v = gerbevf::ConnMultVF::zero(b.cover);
        v.base.xi = parse_vf(need(mj, "xi", "mult_vf.xi"), ambient, "mult_vf.xi");
        v.base.f = parse_cechform(mj.contains("f") ? mj["f"] : json(), b.cover, 0, 2, "mult_vf.f");
        v.a = parse_cechform(mj.contains("a") ? mj["a"] : json(), b.cover, 1, 1, "mult_vf.a");
        b.mult_vf = std::move(v);
    }

    if (j.contains("findim_lie2")) {
        const json& fj = j["findim_lie2"];
        lie2::FinDimLie2 L;
        L.n1 = need(fj, "n1", "findim_lie2.n1").get<int>();
        L.n0 = need(fj, "n0", "findim_lie2.n0").get<int>();
        auto mat = [&](const json& mj, int rows, int cols, const std::string& path) {
            Eigen::MatrixXd m(rows, cols);
            if (static_cast<int>(mj.size()) != rows) throw SchemaError(path);
            for (int r = 0; r < rows; ++r) {
                if (static_cast<int>(mj[static_cast<std::size_t>(r)].size()) != cols)
                    throw SchemaError(path);
                for (int c = 0; c < cols; ++c)
                    m(r, c) = mj[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                                  .get<double>();
            }
            return m;
        };
        L.d = L.n1 ? mat(need(fj, "d", "findim_lie2.d"), L.n0, L.n1, "findim_lie2.d")
                   : Eigen::MatrixXd::Zero(L.n0, 0);
        const json& b00 = need(fj, "b00", "findim_lie2.b00");
        for (int i = 0; i < L.n0; ++i)
            L.b00.push_back(mat(b00[static_cast<std::size_t>(i)], L.n0, L.n0, "findim_lie2.b00"));
        if (L.n1) {
            const json& b01 = need(fj, "b01", "findim_lie2.b01");
            for (int i = 0; i < L.n1; ++i)
                L.b01.push_back(
                    mat(b01[static_cast<std::size_t>(i)], L.n0, L.n1, "findim_lie2.b01"));
            if (fj.contains("j")) {
                for (const auto& v : fj["j"]) L.jtensor.push_back(v.get<double>());
                if (L.jtensor.size() !=
                    static_cast<std::size_t>(L.n1) * static_cast<std::size_t>(L.n0 * L.n0 * L.n0))
                    throw SchemaError("findim_lie2.j");
            }
        }
        b.findim_lie2 = std::move(L);
    }

    if (j.contains("moment_map")) {
        for (std::size_t t = 0; t < j["moment_map"].size(); ++t) {
            const auto& mj = j["moment_map"][t];
            std::string mp = "moment_map[" + std::to_string(t) + "]";
            plectic::HamPair h{parse_vf(need(mj, "xi", mp + ".xi"), ambient, mp + ".xi"),
                               parse_form(need(mj, "beta", mp + ".beta"), ambient, mp + ".beta")};
            b.moment_map.push_back(std::move(h));
        }
    }

    if (j.contains("group_model")) {
        const json& gj = j["group_model"];
        quantomorph::GroupModel G;
        std::vector<std::string> gcoords;
        for (const auto& c : need(gj, "coords", "group_model.coords"))
            gcoords.push_back(c.get<std::string>());
        G.patch = parse_box(need(gj, "box", "group_model.box"), gcoords, "group_model.box");
        for (const auto& f : need(gj, "theta_left", "group_model.theta_left"))
            G.theta_left.push_back(parse_form(f, G.patch, "group_model.theta_left"));
        for (const auto& f : need(gj, "theta_right", "group_model.theta_right"))
            G.theta_right.push_back(parse_form(f, G.patch, "group_model.theta_right"));
        G.eta = parse_form(need(gj, "eta", "group_model.eta"), G.patch, "group_model.eta");
        const json& inner = need(gj, "inner", "group_model.inner");
        const int dg = static_cast<int>(G.theta_left.size());
        G.inner = Eigen::MatrixXd::Zero(dg, dg);
        for (int r = 0; r < dg; ++r)
            for (int c = 0; c < dg; ++c)
                G.inner(r, c) =
                    inner[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)].get<double>();
        if (gj.contains("structure")) {
            for (const auto& sm : gj["structure"]) {
                Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dg, dg);
                for (int r = 0; r < dg; ++r)
                    for (int c = 0; c < dg; ++c)
                        m(r, c) = sm[static_cast<std::size_t>(r)][static_cast<std::size_t>(c)]
                                      .get<double>();
                G.structure.push_back(m);
            }
        }
        b.group_model = std::move(G);
    }

    if (j.contains("qham")) {
        const json& qj = j["qham"];
        quantomorph::QHamData D;
        D.M = ambient;
        D.omega = parse_form(need(qj, "omega", "qham.omega"), ambient, "qham.omega");
        for (std::size_t t = 0; t < need(qj, "phi", "qham.phi").size(); ++t)
            D.moment.push_back(parse_payload_expr(qj["phi"][t].get<std::string>(),
                                                  "qham.phi[" + std::to_string(t) + "]"));
        for (std::size_t t = 0; t < need(qj, "generators", "qham.generators").size(); ++t)
            D.generators.push_back(parse_vf(qj["generators"][t], ambient,
                                            "qham.generators[" + std::to_string(t) + "]"));
        b.qham = std::move(D);
    }

    return b;
}

GeometryBundle load_bundle(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open bundle file: " + path, 0);
    std::ostringstream ss;
    ss << in.rdbuf();
    return load_bundle_text(ss.str());
}

std::vector<std::string> suite_names() {
    return {"cartan", "deligne",    "multvf",    "lie2",   "plectic",
            "butterflyE", "butterflyQ", "square", "qham",   "all"};
}

} // namespace gerbecal::bundle
