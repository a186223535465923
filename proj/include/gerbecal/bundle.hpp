#pragma once

#include <optional>
#include <string>

#include "gerbecal/lie2.hpp"
#include "gerbecal/quantomorph.hpp"

namespace gerbecal::bundle {

/// One verification fixture: manifold, cover and Deligne data plus the
/// optional side payloads the suites consume.
///
/// File layout (JSON): chart indices are 1-based as in reports,
/// coordinate indices 0-based into manifold.coords.  Forms serialize as
/// {"degree": k, "terms": [{"indices": [...], "coefficient": "expr"}]}.
struct GeometryBundle {
    cech::Cover cover;
    cech::DeligneCocycle deligne;
    std::optional<cech::Trivialization> trivialization;
    std::optional<cartan::Form> plectic_form;
    std::optional<gerbevf::ConnMultVF> mult_vf;
    std::optional<lie2::FinDimLie2> findim_lie2;
    std::vector<plectic::HamPair> moment_map;
    std::optional<quantomorph::GroupModel> group_model;
    std::optional<quantomorph::QHamData> qham;
};

/// Parses and structurally validates a geometry bundle.  ParseError carries
/// the byte offset (file) or string offset (expressions); SchemaError names
/// the dotted key that is missing or malformed.
GeometryBundle load_bundle(const std::string& path);
GeometryBundle load_bundle_text(const std::string& text);

/// Suite runner; name in {cartan, deligne, multvf, lie2, plectic,
/// butterflyE, butterflyQ, square, qham, all}.
Report run_suite(const GeometryBundle& b, const std::string& suite, const VerifyCtx& ctx);

std::vector<std::string> suite_names();

} // namespace gerbecal::bundle
