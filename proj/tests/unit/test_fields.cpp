/// @file test_fields.cpp
/// @brief Field gallery: closed-form values, tile indexing, null sets, divergence metadata.

#include <doctest.h>

#include "tracelab/error.hpp"
#include "tracelab/fields.hpp"
#include "tracelab/rng.hpp"
#include "tracelab/test_functions.hpp"
#include "tracelab/traces.hpp"

#include <cmath>
#include <numbers>

using namespace tracelab;
using namespace tracelab::fields;

namespace {

constexpr double kPi = std::numbers::pi;

// Direct transcription of the base cell field used by the tiled construction.
Vec oracle_v(double x, double y) {
    return {std::sin(2 * kPi * x) * std::cos(2 * kPi * y), -std::sin(2 * kPi * y) * std::cos(2 * kPi * x), 0.0};
}

ErrorCode code_of(const std::function<void()>& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error raised");
    return ErrorCode::bad_config;
}

}  // namespace

TEST_CASE("closed-form values") {
    const Vec t = Field::tiled().eval({0.125, 0.75});
    CHECK(t.x == doctest::Approx(-1.0).epsilon(1e-15));
    CHECK(std::abs(t.y) <= 1e-15);
    const Vec r = Field::radial().eval({0.3, 0.4});
    CHECK(r.x == doctest::Approx(1.2).epsilon(1e-15));
    CHECK(r.y == doctest::Approx(1.6).epsilon(1e-15));
    for (double y : {-3.0, 0.2, 7.5}) {
        CHECK(Field::depauw_lift().eval({y, 0.1, 1.0}) == Vec{0, 0, 1});
        CHECK(Field::depauw_lift().eval({0.3, y, 4.0}) == Vec{0, 0, 1});
    }
    CHECK(Field::rotation().eval({0.3, -0.2}) == Vec{0.2, 0.3, 0});
    CHECK(Field::shear(ShearProfile::sin_inverse).eval({5, 0.5}).x == doctest::Approx(std::sin(2.0)));
}

TEST_CASE("tile index examples") {
    auto a = tile_index({0.125, 0.75});
    CHECK(a.i == 0);
    CHECK(a.j == 1);
    auto b = tile_index({0.6, 0.3});
    CHECK(b.i == 2);
    CHECK(b.j == 2);
    auto c = tile_index({0.5, 1.5});
    CHECK(c.i == 0);
    CHECK(c.j == 0);
    auto d = tile_index({-0.3, 0.01});
    CHECK(d.j == 7);
    CHECK(d.i == static_cast<std::int64_t>(std::floor(-0.3 * 128)));
}

TEST_CASE("null sets and domain errors") {
    CHECK(code_of([] { tile_index({0.3, 0.5}); }) == ErrorCode::on_null_set);
    CHECK(code_of([] { tile_index({0.25, 0.3}); }) == ErrorCode::on_null_set);
    CHECK(code_of([] { tile_index({0.3, 0.0}); }) == ErrorCode::outside_domain);
    CHECK(code_of([] { Field::radial().eval({0, 0}); }) == ErrorCode::on_null_set);
    CHECK(code_of([] { Field::depauw_lift().eval({0.1, 0.1, 0.0}); }) == ErrorCode::outside_domain);
    CHECK(code_of([] { Field::depauw_slab().eval({0.1, 0.1}); }) == ErrorCode::time_out_of_range);
}

TEST_CASE("tiled field matches the base cell on every tile") {
    const Field u = Field::tiled();
    for (int n = 0; n < 2000; ++n) {
        const int j = static_cast<int>(counter_hash(1, n, 0, 0) % 20) - 2;
        const auto i = static_cast<std::int64_t>(counter_hash(1, n, 1, 0) % 64) - 32;
        const double lx = counter_uniform(1, n, 2, 0);
        const double ly = 1.0 + counter_uniform(1, n, 3, 0);
        const Vec x{std::ldexp(lx + static_cast<double>(i), -j), std::ldexp(ly, -j)};
        const auto ti = tile_index(x);
        REQUIRE(ti.j == j);
        CHECK(ti.i == i);
        const Vec got = u.eval(x);
        const Vec want = oracle_v(std::ldexp(x.x, j) - static_cast<double>(i), std::ldexp(x.y, j));
        CHECK(got == want);
    }
}

TEST_CASE("tiled periodicity in the first variable") {
    const Field u = Field::tiled();
    int checked = 0;
    for (int n = 0; n < 10000; ++n) {
        const int k = static_cast<int>(counter_hash(2, n, 0, 0) % 16);
        // x with at most 40 fractional bits keeps x + 2^{-k-1} exact.
        const double x = std::ldexp(static_cast<double>(counter_hash(2, n, 1, 0) >> 24), -40) - 8.0;
        const double y = std::ldexp(1.0, -k) * counter_uniform(2, n, 2, 0);
        const double xs = x + std::ldexp(1.0, -k - 1);
        REQUIRE(xs - std::ldexp(1.0, -k - 1) == x);
        try {
            CHECK(u.eval({xs, y}) == u.eval({x, y}));
            ++checked;
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::on_null_set);
        }
    }
    CHECK(checked >= 9990);
}

TEST_CASE("tiled field is tangent to tile edges") {
    const BaseCell cell;
    for (int n = 0; n <= 100; ++n) {
        const double s = n / 100.0;
        CHECK(std::abs(base_cell_eval(cell, 0.0, 1.0 + s).x) <= 1e-12);
        CHECK(std::abs(base_cell_eval(cell, 1.0, 1.0 + s).x) <= 1e-12);
        CHECK(std::abs(base_cell_eval(cell, s, 1.0).y) <= 1e-12);
        CHECK(std::abs(base_cell_eval(cell, s, 2.0).y) <= 1e-12);
        // One-sided limits from inside a tile agree with the edge values.
        const Vec inside = Field::tiled().eval({std::nextafter(0.5, 1.0), 0.75 + 0.2 * s});
        CHECK(std::abs(inside.x) <= 1e-12);
    }
    const BaseCell other{3, 1, 0.7};
    for (int n = 0; n <= 100; ++n) {
        const double s = n / 100.0;
        CHECK(std::abs(base_cell_eval(other, 1.0, 1.0 + s).x) <= 1e-12);
        CHECK(std::abs(base_cell_eval(other, s, 2.0).y) <= 1e-12);
    }
}

TEST_CASE("tiled field is bounded by sup |v|") {
    const Field u = Field::tiled();
    double sup = 0.0;
    for (int n = 0; n < 1000000; ++n) {
        const Vec x{4.0 * counter_uniform(3, n, 0, 0) - 2.0, std::ldexp(counter_uniform(3, n, 1, 0), -(n % 30))};
        try {
            sup = std::max(sup, norm(u.eval(x)));
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::on_null_set);
        }
    }
    CHECK(sup <= std::sqrt(2.0));
    CHECK(sup <= 1.0 + 1e-15);
}

TEST_CASE("divergence metadata") {
    const auto id = Field::identity().divergence_info();
    CHECK(id.tag == DivergenceInfo::Tag::absolutely_continuous);
    CHECK(id.density({0.3, -0.7}) == 2.0);
    CHECK(Field::tiled().divergence_info().tag == DivergenceInfo::Tag::zero);
    CHECK(Field::shear(ShearProfile::linear).divergence_info().tag == DivergenceInfo::Tag::zero);
    CHECK(Field::rotation().divergence_info().tag == DivergenceInfo::Tag::zero);
    Polynomial p;
    p.components[0] = {{3.0, 2, 1}};   // 3 x^2 y
    p.components[1] = {{-1.0, 0, 3}};  // -y^3
    const auto info = Field::polynomial(p).divergence_info();
    const Vec x{0.4, -1.3};
    CHECK(info.density(x) == doctest::Approx(6 * x.x * x.y - 3 * x.y * x.y));
}

TEST_CASE("divergence-free fields pair to zero with interior test functions") {
    using geometry::Domain;
    const Domain disk = Domain::disk();
    const Domain win = Domain::half_plane_window();
    struct Case {
        Field field;
        Domain domain;
        Vec lo;
        Vec hi;
        double rmax;
    };
    const Case cases[] = {
        {Field::rotation(), disk, {-0.4, -0.4}, {0.4, 0.4}, 0.5},
        {Field::radial(), disk, {-0.3, 0.3}, {0.3, 0.5}, 0.25},
        {Field::shear(ShearProfile::sin_inverse), win, {0.0, 0.5}, {1.0, 0.6}, 0.35},
        // One row of tiles, where the field is analytic.
        {Field::tiled(), win, {0.0, 0.74}, {1.0, 0.76}, 0.23},
    };
    for (const auto& c : cases) {
        for (int n = 0; n < 10; ++n) {
            const Vec center{c.lo.x + (c.hi.x - c.lo.x) * counter_uniform(4, n, 0, 0),
                             c.lo.y + (c.hi.y - c.lo.y) * counter_uniform(4, n, 1, 0)};
            const double delta = c.rmax * (0.5 + 0.5 * counter_uniform(4, n, 2, 0));
            const auto phi = testfn::product(testfn::bump(center, delta), testfn::monomial(n % 3, n % 2, 0));
            const auto pr = traces::distributional_pairing(c.field, c.field.divergence_info(), c.domain, phi,
                                                           {.tol = 1e-7});
            INFO(c.field.name(), " ", phi.name);
            CHECK(std::abs(pr.value) <= pr.error);
        }
    }
}
