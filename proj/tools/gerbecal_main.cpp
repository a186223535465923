#include <CLI11.hpp>
#include <cstdio>
#include <string>

#include "gerbecal/bundle.hpp"

using namespace gerbecal;

int main(int argc, char** argv) {
    CLI::App app{"gerbecal - symbolic/numeric verification of gerbe and Lie 2-algebra fixtures"};
    app.require_subcommand(1);

    std::string path;
    std::string suite = "all";
    std::string format = "text";
    int samples = 25;
    double tol = 1e-9;
    std::string seed_str = "0x5EED";
    bool timings = false;

    CLI::App* run = app.add_subcommand("run", "load a geometry bundle and run a suite");
    run->add_option("bundle", path, "geometry bundle file")->required();
    run->add_option("--suite", suite, "one of: cartan, deligne, multvf, lie2, plectic, "
                                      "butterflyE, butterflyQ, square, qham, all");
    run->add_option("--samples", samples, "sample points per check (default 25)");
    run->add_option("--tol", tol, "relative tolerance (default 1e-9)");
    run->add_option("--seed", seed_str, "RNG seed, decimal or 0x-hex (default 0x5EED)");
    run->add_option("--format", format, "text or structured")
        ->check(CLI::IsMember({"text", "structured"}));
    run->add_flag("--timings", timings, "include wall times in the output");

    CLI::App* suites_cmd = app.add_subcommand("suites", "list suite names");

    CLI11_PARSE(app, argc, argv);

    if (suites_cmd->parsed()) {
        for (const auto& s : bundle::suite_names()) std::printf("%s\n", s.c_str());
        return 0;
    }

    VerifyCtx ctx;
    ctx.samples = samples;
    ctx.tol = tol;
    try {
        ctx.seed = std::stoull(seed_str, nullptr, 0);
    } catch (const std::exception&) {
        std::fprintf(stderr, "error: bad seed '%s'\n", seed_str.c_str());
        return 2;
    }

    bundle::GeometryBundle b;
    try {
        b = bundle::load_bundle(path);
    } catch (const ParseError& e) {
        std::fprintf(stderr, "parse error: %s\n", e.what());
        return 2;
    } catch (const SchemaError& e) {
        std::fprintf(stderr, "schema error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "load error: %s\n", e.what());
        return 2;
    }

    Report rep;
    try {
        rep = bundle::run_suite(b, suite, ctx);
    } catch (const UnknownSuite& e) {
        std::fprintf(stderr, "%s\n", e.what());
        return 2;
    }

    std::string out = format == "structured" ? rep.structured(timings) : rep.text(timings);
    std::fputs(out.c_str(), stdout);
    return rep.all_ok() ? 0 : 1;
}
