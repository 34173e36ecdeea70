/// @file test_quadrature.cpp
/// @brief Region integration (deterministic and Monte Carlo) and limit classification.

#include <doctest.h>

#include "tracelab/error.hpp"
#include "tracelab/quadrature.hpp"

#include <cmath>
#include <cstdlib>
#include <numbers>

using namespace tracelab;
using namespace tracelab::geometry;
using namespace tracelab::quadrature;

namespace {

constexpr double kPi = std::numbers::pi;

double one(const Vec&) { return 1.0; }

}  // namespace

TEST_CASE("area of the unit disk") {
    const Domain disk = Domain::disk();
    const auto r = integrate(one, {disk, WholeDomain{}, {}}, {});
    CHECK(std::abs(r.value - kPi) <= 1e-8);
    const auto b = integrate(one, {disk, Ball{{0, 0}, 1.0}, {}}, {});
    CHECK(std::abs(b.value - kPi) <= 1e-8);
}

TEST_CASE("singular integrand on the half disk") {
    const Domain hd = Domain::half_disk();
    const auto f = [](const Vec& x) { return x.y / dot(x, x); };
    const auto r = integrate(f, {hd, WholeDomain{}, Vec{0, 0}}, {.tol = 1e-6});
    CHECK(std::abs(r.value - 2.0) <= 1e-6);
    // Same integral with the origin on the flat side of a window.
    const Domain win = Domain::half_plane_window(-1, 1, 1);
    const auto g = integrate(f, {win, Ball{{0, 0}, 1.0}, Vec{0, 0}}, {.tol = 1e-6});
    CHECK(std::abs(g.value - 2.0) <= 1e-6);
}

TEST_CASE("inner tube of the unit circle") {
    const Domain disk = Domain::disk();
    const auto r = integrate(one, {disk, InnerTube{full_circle(disk), 0.1}, {}}, {});
    CHECK(std::abs(r.value - kPi * (0.2 - 0.01)) <= 1e-8);
    const auto o = integrate(one, {disk, OuterTube{full_circle(disk), 0.1}, {}}, {});
    CHECK(std::abs(o.value - kPi * (0.2 + 0.01)) <= 1e-8);
}

TEST_CASE("balls centred on boundaries") {
    const Domain disk = Domain::disk();
    // Lens area of B_r((1,0)) inside the unit disk, closed form.
    const double r = 0.3;
    const double lens = r * r * std::acos(r / 2) + std::acos(1 - r * r / 2) - 0.5 * r * std::sqrt(4 - r * r);
    const auto in = integrate(one, {disk, Ball{{1, 0}, r}, {}}, {});
    CHECK(std::abs(in.value - lens) <= 1e-8);
    const auto out = integrate(one, {disk, BallExterior{{1, 0}, r}, {}}, {});
    CHECK(std::abs(out.value - (kPi * r * r - lens)) <= 1e-8);
    const Domain sq = Domain::square();
    const auto corner = integrate(one, {sq, Ball{{0, 0}, 0.5}, {}}, {});
    CHECK(std::abs(corner.value - kPi / 16) <= 1e-8);
    const Domain win = Domain::half_space_window();
    const auto half_ball = integrate(one, {win, Ball{{0, 0, 0}, 0.5}, {}}, {});
    CHECK(std::abs(half_ball.value - 2.0 / 3.0 * kPi * 0.125) <= 1e-8);
}

TEST_CASE("tubes around open patches") {
    const Domain disk = Domain::disk();
    const double r = 0.05;
    // Quarter arc: sector annulus plus two half-disk caps clipped to the disk.
    const auto arc = circle_arc(disk, 0, kPi / 2);
    const auto both = integrate(one, {disk, FullTube{arc, r}, {}}, {});
    CHECK(std::abs(both.value - (kPi / 2 * 2 * r + kPi * r * r)) <= 1e-8);
    const Domain sq = Domain::square();
    const auto edge = integrate(one, {sq, InnerTube{square_edge(sq, 0), r}, {}}, {});
    CHECK(std::abs(edge.value - r) <= 1e-10);
    const auto edge_out = integrate(one, {sq, OuterTube{square_edge(sq, 0), r}, {}}, {});
    CHECK(std::abs(edge_out.value - (r + kPi * r * r)) <= 1e-8);
    const Domain win = Domain::half_space_window();
    const auto face = integrate(one, {win, InnerTube{bottom_face(win, -0.5, 0.5, -0.5, 0.5), r}, {}}, {});
    // Slab over the face, quarter cylinders along the edges, eighth balls at corners.
    const double expect = r + 4 * (kPi * r * r / 4) + 4 * (kPi * r * r * r / 6);
    CHECK(std::abs(face.value - expect) <= 1e-8);
}

TEST_CASE("space-time slab") {
    const Domain sq = Domain::square();
    const auto r = integrate([](const Vec& x) { return x.x * x.z; }, {sq, SpaceTimeSlab{0.25, 0.75}, {}}, {});
    CHECK(std::abs(r.value - 0.5 * 0.25) <= 1e-12);
}

TEST_CASE("linearity within combined error") {
    const Domain disk = Domain::disk();
    const RegionSpec reg{disk, InnerTube{full_circle(disk), 0.2}, {}};
    const auto f = [](const Vec& x) { return std::sin(3 * x.x) * x.y * x.y; };
    const auto g = [](const Vec& x) { return std::exp(x.x + x.y); };
    const auto rf = integrate(f, reg, {});
    const auto rg = integrate(g, reg, {});
    const auto rh = integrate([&](const Vec& x) { return 2 * f(x) - 3 * g(x); }, reg, {});
    CHECK(std::abs(rh.value - (2 * rf.value - 3 * rg.value)) <= rh.error + 2 * rf.error + 3 * rg.error + 1e-12);
}

TEST_CASE("monotone tubes for nonnegative integrands") {
    const Domain disk = Domain::disk();
    const auto f = [](const Vec& x) { return 1 + x.x * x.x; };
    double prev = 0;
    for (double r : {0.01, 0.02, 0.05, 0.1, 0.3}) {
        const auto v = integrate(f, {disk, InnerTube{circle_arc(disk, 0.5, 2.0), r}, {}}, {});
        CHECK(v.value >= prev);
        prev = v.value;
    }
}

TEST_CASE("monte carlo mode is reproducible and accurate") {
    const Domain disk = Domain::disk();
    Options opt{.mode = Mode::monte_carlo, .tol = 1e-3, .seed = 42};
    const auto f = [](const Vec& x) { return std::abs(std::sin(7 * x.x)); };
    const auto a = integrate(f, {disk, WholeDomain{}, {}}, opt);
    const auto exact = integrate(f, {disk, WholeDomain{}, {}}, {.tol = 1e-9});
    CHECK(std::abs(a.value - exact.value) <= a.error);
    setenv("TRACELAB_THREADS", "3", 1);
    const auto b = integrate(f, {disk, WholeDomain{}, {}}, opt);
    unsetenv("TRACELAB_THREADS");
    CHECK(a.value == b.value);
    CHECK(a.error == b.error);
    opt.seed = 43;
    const auto c = integrate(f, {disk, WholeDomain{}, {}}, opt);
    CHECK(c.value != a.value);
}

TEST_CASE("deterministic mode does not depend on worker count") {
    const Domain disk = Domain::disk();
    const auto f = [](const Vec& x) { return std::abs(x.x - 0.3) * std::cos(x.y); };
    setenv("TRACELAB_THREADS", "1", 1);
    const auto a = integrate(f, {disk, Ball{{1, 0}, 0.5}, {}}, {});
    setenv("TRACELAB_THREADS", "4", 1);
    const auto b = integrate(f, {disk, Ball{{1, 0}, 0.5}, {}}, {});
    unsetenv("TRACELAB_THREADS");
    CHECK(a.value == b.value);
    CHECK(a.evaluations == b.evaluations);
}

TEST_CASE("budget exhaustion") {
    const Domain disk = Domain::disk();
    const auto f = [](const Vec& x) { return x.x > 0.1 ? 1.0 : 0.0; };
    Options opt;
    opt.tol = 1e-14;
    opt.max_evaluations = 20000;
    CHECK_THROWS_AS(integrate(f, {disk, WholeDomain{}, {}}, opt), Error);
    const auto r = try_integrate(f, {disk, WholeDomain{}, {}}, opt);
    CHECK_FALSE(r.converged);
    CHECK(std::abs(r.value - (std::acos(0.1) - 0.1 * std::sqrt(0.99))) <= 1e-2);
}

TEST_CASE("region membership") {
    const Domain disk = Domain::disk();
    const RegionSpec tube{disk, InnerTube{full_circle(disk), 0.1}, {}};
    CHECK(region_contains(tube, {0.95, 0}));
    CHECK_FALSE(region_contains(tube, {0.85, 0}));
    CHECK_FALSE(region_contains(tube, {1.05, 0}));
}

TEST_CASE("limit estimate examples") {
    const RadiusSchedule sched{0.5, 0.5, 12};
    const auto lin = limit_estimate([](double r) { return 2 * kPi - kPi * r; }, sched);
    CHECK(lin.classification == Classification::convergent);
    REQUIRE(lin.limit);
    CHECK(std::abs(*lin.limit - 2 * kPi) <= 1e-6);
    CHECK(*lin.limit >= lin.liminf_band.lo);
    CHECK(*lin.limit <= lin.liminf_band.hi);
    CHECK(*lin.limit >= lin.limsup_band.lo);
    CHECK(*lin.limit <= lin.limsup_band.hi);

    const auto osc = limit_estimate([](double r) { return std::sin(1 / r); }, sched);
    CHECK(osc.classification == Classification::oscillatory);
    CHECK_FALSE(osc.limit);
    CHECK(osc.liminf_band.lo < -0.5);
    CHECK(osc.limsup_band.hi > 0.5);
    CHECK(osc.liminf_band.lo >= -1.0);
    CHECK(osc.limsup_band.hi <= 1.0);

    const auto c = limit_estimate([](double) { return 3.25; }, sched);
    CHECK(c.classification == Classification::convergent);
    CHECK(*c.limit == doctest::Approx(3.25).epsilon(1e-14));

    CHECK_THROWS_AS(limit_estimate([](double) { return 0.0; }, RadiusSchedule{0.5, 0.5, 3}), Error);
}

TEST_CASE("noisy samples are inconclusive") {
    std::vector<Sample> s;
    for (int k = 0; k < 8; ++k) s.push_back({std::ldexp(1.0, -k), 1.0, 0.1});
    CHECK(classify_samples(s).classification == Classification::inconclusive);
}
