#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "gerbecal/bundle.hpp"

using namespace gerbecal;

namespace {

std::string fixture(const std::string& name) {
    return std::string(GERBECAL_FIXTURE_DIR) + "/" + name;
}

} // namespace

TEST_CASE("shipped fixtures load and validate") {
    VerifyCtx ctx;
    auto b = bundle::load_bundle(fixture("f2.json"));
    CHECK(b.cover.charts.size() == 2);
    CHECK(b.trivialization.has_value());
    CHECK(b.plectic_form.has_value());
    CHECK(b.mult_vf.has_value());
    CHECK(b.findim_lie2.has_value());
    CHECK(cech::validate_deligne(b.cover, b.deligne, ctx).all_ok());
    CHECK(gerbevf::validate_connpres(b.cover, b.deligne, *b.mult_vf, ctx).all_ok());

    auto q = bundle::load_bundle(fixture("qham_abelian.json"));
    CHECK(q.group_model.has_value());
    CHECK(q.qham.has_value());
    CHECK(q.moment_map.size() == 1);
}

TEST_CASE("schema errors name the missing key") {
    const char* missing_B = R"({
      "manifold": {"coords": ["x"], "box": [[-1, 1]]},
      "cover": [[[-1, 1]]],
      "deligne": {}
    })";
    try {
        bundle::load_bundle_text(missing_B);
        CHECK(false);
    } catch (const SchemaError& e) {
        CHECK(e.key_path == "deligne.B");
    }
}

TEST_CASE("expression parse errors carry their location") {
    const char* bad_expr = R"({
      "manifold": {"coords": ["x"], "box": [[-1, 1]]},
      "cover": [[[-1, 1]]],
      "deligne": {"B": [{"idx": [1], "form": {"degree": 0, "terms":
        [{"indices": [], "coefficient": "x + "}]}}]}
    })";
    CHECK_THROWS_AS(bundle::load_bundle_text(bad_expr), ParseError);

    CHECK_THROWS_AS(bundle::load_bundle_text("{ not json"), ParseError);
    CHECK_THROWS_AS(bundle::load_bundle(fixture("missing_file.json")), ParseError);
}

TEST_CASE("suites run deterministically on the two-chart fixture") {
    VerifyCtx ctx;
    auto b = bundle::load_bundle(fixture("f2.json"));

    Report deligne = bundle::run_suite(b, "deligne", ctx);
    CHECK(deligne.all_ok());

    Report multvf = bundle::run_suite(b, "multvf", ctx);
    CHECK(multvf.all_ok());

    Report again = bundle::run_suite(b, "deligne", ctx);
    CHECK(deligne.text() == again.text());
    CHECK(deligne.structured() == again.structured());

    CHECK_THROWS_AS(bundle::run_suite(b, "nope", ctx), UnknownSuite);
}

TEST_CASE("qham suite skips without a group model, runs with one") {
    VerifyCtx ctx;
    auto f2 = bundle::load_bundle(fixture("f2.json"));
    Report skipped = bundle::run_suite(f2, "qham", ctx);
    CHECK(skipped.all_ok());
    CHECK(skipped.count(Status::Skip) > 0);

    auto q = bundle::load_bundle(fixture("qham_abelian.json"));
    Report rep = bundle::run_suite(q, "qham", ctx);
    CHECK(rep.all_ok());
    CHECK(rep.count(Status::Skip) == 0);
}

TEST_CASE("square suite passes on the abelian fixture") {
    VerifyCtx ctx;
    auto q = bundle::load_bundle(fixture("qham_abelian.json"));
    Report rep = bundle::run_suite(q, "square", ctx);
    CHECK(rep.all_ok());
    CHECK(rep.count(Status::Skip) == 0);
}

TEST_CASE("butterflyE reports a curvature mismatch as a failure entry") {
    VerifyCtx ctx;
    auto b = bundle::load_bundle(fixture("f2.json"));
    cartan::Form wrong(3, b.cover.ambient);
    wrong.add_term({0, 1, 2}, symexpr::Expr::constant(2.0));
    b.plectic_form = wrong;
    Report rep = bundle::run_suite(b, "butterflyE", ctx);
    CHECK(!rep.all_ok());
    bool note_found = false;
    for (const auto& c : rep.checks)
        if (c.status == Status::Fail && c.note.find("three-curvature") != std::string::npos)
            note_found = true;
    CHECK(note_found);
}

TEST_CASE("broken fixture fails the deligne suite") {
    VerifyCtx ctx;
    auto b = bundle::load_bundle(fixture("f2_broken.json"));
    Report rep = bundle::run_suite(b, "deligne", ctx);
    CHECK(!rep.all_ok());
}
