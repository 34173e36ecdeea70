/// @file test_config.cpp
/// @brief Config parsing, key diagnostics, report formats and experiment dispatch.

#include <doctest.h>

#include "tracelab/config.hpp"
#include "tracelab/error.hpp"
#include "tracelab/experiments.hpp"
#include "tracelab/report.hpp"

#include <cmath>
#include <numbers>
#include <string>

using namespace tracelab;
using config::Json;
using config::Reader;

namespace {

/// Message of the BadConfig error raised by f, or "" when nothing is thrown.
template <class F>
std::string bad_config_message(F&& f) {
    try {
        f();
    } catch (const Error& e) {
        if (e.code() != ErrorCode::bad_config) return "wrong code: " + std::string(e.what());
        return e.what();
    }
    return "";
}

bool mentions(const std::string& message, const std::string& key) {
    return message.find("'" + key + "'") != std::string::npos;
}

}  // namespace

TEST_CASE("reader reports the offending key") {
    const Json j = Json::parse(R"({"a": {"b": [{"c": "x"}], "n": 3}, "extra": 1})");
    const Reader root(j, "");
    const Reader a = root.object("a");
    CHECK(a.integer("n") == 3);
    const auto list = a.objects("b");
    REQUIRE(list.size() == 1);
    CHECK(mentions(bad_config_message([&] { list[0].number("c"); }), "a.b[0].c"));
    CHECK(mentions(bad_config_message([&] { a.string("missing"); }), "a.missing"));
    CHECK(mentions(bad_config_message([&] { root.finish(); }), "extra"));
    const Json k = Json::parse(R"({"kept": 1, "typo": 2})");
    const Reader r(k, "cfg");
    CHECK(r.integer("kept") == 1);
    const auto msg = bad_config_message([&] { r.finish(); });
    CHECK(mentions(msg, "cfg.typo"));
    CHECK(msg.find("unknown key") != std::string::npos);
}

TEST_CASE("integers reject fractional values") {
    const Json j = Json::parse(R"({"n": 2.5, "v": [1, 2.0]})");
    const Reader r(j, "");
    CHECK(mentions(bad_config_message([&] { r.integer("n"); }), "n"));
    CHECK(mentions(bad_config_message([&] { r.integers("v"); }), "v"));
}

TEST_CASE("field kinds") {
    const auto field = [](const char* text) { return config::parse_field(Reader(Json::parse(text), "field")); };
    const auto poly = field(R"({"kind": "polynomial", "components": [
        {"terms": [{"coeff": 2, "powers": [1, 0]}]},
        {"terms": [{"coeff": -1, "powers": [0, 2]}, {"coeff": 0.5, "powers": [0, 0]}]}]})");
    const Vec v = poly.eval({0.3, 0.4});
    CHECK(v.x == doctest::Approx(0.6));
    CHECK(v.y == doctest::Approx(-0.16 + 0.5));
    CHECK(field(R"({"kind": "rotation"})").eval({0.2, 0.5}) == Vec{-0.5, 0.2, 0});
    CHECK(field(R"({"kind": "radial", "center": [1, 0]})").singular_point() == Vec{1, 0, 0});
    CHECK(field(R"({"kind": "tiled", "cell": {"p": 2, "q": 2, "amplitude": 0.5}})").kind() == fields::FieldKind::tiled);
    CHECK(mentions(bad_config_message([&] { field(R"({"kind": "vortex-sheet"})"); }), "field.kind"));
    CHECK(mentions(bad_config_message([&] { field(R"({"kind": "rotation", "scale": 2})"); }), "field.scale"));
    CHECK(mentions(bad_config_message([&] { field(R"({"kind": "shear", "profile": "cubic"})"); }),
                   "field.profile"));
}

TEST_CASE("domains and patches") {
    const auto domain = [](const char* text) { return config::parse_domain(Reader(Json::parse(text), "domain")); };
    const auto disk = domain(R"({"kind": "unit-disk"})");
    CHECK(disk.kind() == geometry::DomainKind::unit_disk);
    CHECK(mentions(bad_config_message([&] { domain(R"({"kind": "torus"})"); }), "domain.kind"));
    CHECK(!bad_config_message([&] { domain(R"({"kind": "unit-disk", "radius": -1})"); }).empty());
    const auto patch = config::parse_patch(
        Reader(Json::parse(R"({"kind": "circle-arc", "theta0": 0, "theta1": 1.5})"), "patch"), disk);
    CHECK(geometry::patch_measure(patch) == doctest::Approx(1.5));
    CHECK(mentions(bad_config_message([&] {
                       config::parse_patch(Reader(Json::parse(R"({"kind": "square-edge", "edge": 0})"), "patch"),
                                           disk);
                   }),
                   "patch.kind"));
}

TEST_CASE("test functions") {
    const auto fn = [](const char* text) { return config::parse_test_function(Reader(Json::parse(text), "phi")); };
    const auto bump = fn(R"({"kind": "bump", "center": [0.5, 0], "radius": 0.25})");
    CHECK(bump.value({0.5, 0}) == doctest::Approx(1.0));
    CHECK(bump.value({0.8, 0}) == 0.0);
    const auto prod = fn(R"({"kind": "product", "factors": [
        {"kind": "monomial", "powers": [2, 1]}, {"kind": "constant", "value": 3}], "scale": 0.5})");
    CHECK(prod.value({2.0, 3.0}) == doctest::Approx(0.5 * 3 * 4 * 3));
    const Vec g = prod.gradient({2.0, 3.0});
    CHECK(g.x == doctest::Approx(0.5 * 3 * 2 * 2 * 3));
    CHECK(g.y == doctest::Approx(0.5 * 3 * 4));
    CHECK(mentions(bad_config_message([&] { fn(R"({"kind": "bump", "center": [0, 0], "radius": 0})"); }),
                   "phi.radius"));
    const auto st = config::parse_space_time_test_function(Reader(
        Json::parse(R"({"space": {"kind": "constant"}, "time": {"kind": "cutoff", "start": 0.2, "end": 0.6}})"),
        "phi"));
    CHECK(st.value({}, 0.1) == 1.0);
    CHECK(st.value({}, 0.7) == 0.0);
    CHECK(mentions(bad_config_message([&] {
                       config::parse_space_time_test_function(Reader(
                           Json::parse(
                               R"({"space": {"kind": "constant"}, "time": {"kind": "bump", "start": 0.6, "end": 0.2}})"),
                           "phi"));
                   }),
                   "phi.time.end"));
}

TEST_CASE("scalar maps, schedules and quadrature options") {
    const auto beta = config::parse_beta(Reader(Json::parse(R"({"kind": "power", "exponent": 3})"), "beta"));
    CHECK(beta.f(-2.0) == -8.0);
    CHECK(mentions(
        bad_config_message([] { config::parse_beta(Reader(Json::parse(R"({"kind": "power", "exponent": 0})"), "beta")); }),
        "beta.exponent"));
    const auto s = config::parse_schedule(Reader(Json::parse(R"({"r0": 0.25, "count": 4})"), "schedule"));
    CHECK(s.radii() == std::vector<double>{0.25, 0.125, 0.0625, 0.03125});
    CHECK(mentions(bad_config_message([] {
                       config::parse_schedule(Reader(Json::parse(R"({"count": 3})"), "schedule"));
                   }),
                   "schedule.count"));
    CHECK(!bad_config_message([] {
               config::parse_schedule(Reader(Json::parse(R"({"ratio": 1.5})"), "schedule"));
           }).empty());
    const auto o = config::parse_quadrature(Reader(Json::parse(R"({"mode": "monte-carlo", "tol": 1e-4})"), "q"), {});
    CHECK(o.mode == quadrature::Mode::monte_carlo);
    CHECK(o.tol == 1e-4);
    CHECK(mentions(bad_config_message([] {
                       config::parse_quadrature(Reader(Json::parse(R"({"mode": "qmc"})"), "quadrature"), {});
                   }),
                   "quadrature.mode"));
}

TEST_CASE("report formats") {
    CHECK(report::format_double(0.1) == "0.10000000000000001");
    CHECK(report::profile_csv({{0.5, 1.0, 0.0}}) == "r,value,error\n0.5,1,0\n");
    const auto p = transport::DyadicPattern::stripes(1, 1);
    const auto pgm = report::pattern_pgm(p);
    const std::string header = "P5\n4 2\n255\n";
    REQUIRE(pgm.size() == header.size() + 8);
    CHECK(pgm.substr(0, header.size()) == header);
    // Stripes of width 1/2: white, black, white, black on every row.
    CHECK(static_cast<unsigned char>(pgm[header.size()]) == 255);
    CHECK(static_cast<unsigned char>(pgm[header.size() + 1]) == 0);
    CHECK(report::sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    const Json cfg = Json::parse(R"({"a": 1})");
    CHECK(report::inputs_hash("x", cfg, 1) == report::inputs_hash("x", cfg, 1));
    CHECK(report::inputs_hash("x", cfg, 1) != report::inputs_hash("x", cfg, 2));
    CHECK(report::inputs_hash("x", cfg, 1) != report::inputs_hash("y", cfg, 1));
}

TEST_CASE("experiment dispatch") {
    CHECK(experiments::names().size() == 12);
    const Json cfg = Json::parse(R"({"experiment": "minkowski", "checks": []})");
    CHECK(!bad_config_message([&] { experiments::run("no-such-experiment", cfg); }).empty());
    CHECK(mentions(bad_config_message([&] { experiments::run("gluing", cfg); }), "experiment"));
    const Json typo = Json::parse(R"({"experiment": "minkowski", "checks": [], "sead": 3})");
    CHECK(mentions(bad_config_message([&] { experiments::run("minkowski", typo); }), "sead"));
    const Json one = Json::parse(R"({"checks": [{"name": "segment", "kind": "content",
        "domain": {"kind": "unit-square"}, "patch": {"kind": "square-edge", "edge": 1},
        "r": 0.25, "expected": 1.0, "tolerance": 1e-8}]})");
    const auto rep = experiments::run("minkowski", one, 5);
    CHECK(rep.pass);
    CHECK(rep.summary["seed"] == 5);
    CHECK(rep.summary["experiment"] == "minkowski");
    CHECK(rep.summary["inputs_hash"] == report::inputs_hash("minkowski", one, 5));
    Json wrong = one;
    wrong["checks"][0]["expected"] = 2.0;
    CHECK_FALSE(experiments::run("minkowski", wrong).pass);
}
