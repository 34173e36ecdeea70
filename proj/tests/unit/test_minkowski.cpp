/// @file test_minkowski.cpp
/// @brief One-sided and two-sided Minkowski contents and their weak limits.

#include <doctest.h>

#include "tracelab/minkowski.hpp"

#include <cmath>
#include <numbers>

using namespace tracelab;
using namespace tracelab::minkowski;
using geometry::Domain;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("content examples") {
    const Domain disk = Domain::disk();
    const auto circle = geometry::full_circle(disk);
    CHECK(content(circle, Side::inner, 0.1, {}).value == doctest::Approx(kPi * 1.9).epsilon(1e-9));
    CHECK(content(circle, Side::outer, 0.1, {}).value == doctest::Approx(kPi * 2.1).epsilon(1e-9));
    const auto edge = geometry::square_edge(Domain::square(), 0);
    for (double r : {0.3, 0.01, 1e-5}) CHECK(std::abs(content(edge, Side::inner, r, {}).value - 1.0) <= 1e-8);
    const geometry::BoundaryPatch empty(disk, {}, false);
    CHECK(content(empty, Side::inner, 0.1, {}).value == 0.0);
    CHECK(content(empty, Side::both, 0.1, {}).value == 0.0);
}

TEST_CASE("small-radius circle content") {
    const auto circle = geometry::full_circle(Domain::disk());
    const double r = 1e-3;
    CHECK(std::abs(content(circle, Side::inner, r, {}).value - kPi * (2 - r)) <= 1e-4);
}

TEST_CASE("content limits") {
    const Domain disk = Domain::disk();
    const auto circle = geometry::full_circle(disk);
    for (Side s : {Side::inner, Side::outer, Side::both}) {
        const auto est = content_limit(circle, s, {}, {});
        REQUIRE(est.limit);
        CHECK(est.classification == quadrature::Classification::convergent);
        CHECK(std::abs(*est.limit - 2 * kPi) <= 1e-3);
    }
    const auto arc = geometry::circle_arc(disk, 0, kPi / 2);
    const auto est = content_limit(arc, Side::inner, {}, {});
    REQUIRE(est.limit);
    CHECK(std::abs(*est.limit - kPi / 2) <= 1e-3);
    // End effects are O(r).
    for (const auto& s : est.samples) CHECK(std::abs(s.value - kPi / 2) <= 2 * s.r);
}

TEST_CASE("inner and outer tubes split the full tube") {
    const auto circle = geometry::full_circle(Domain::disk());
    const auto edge = geometry::square_edge(Domain::square(), 2);
    for (const auto* patch : {&circle, &edge}) {
        for (double r : {0.2, 0.05, 0.003}) {
            const double in = content(*patch, Side::inner, r, {}).value;
            const double out = content(*patch, Side::outer, r, {}).value;
            const double both = content(*patch, Side::both, r, {}).value;
            CHECK(std::abs(in + out - 2 * both) <= 1e-7);
        }
    }
}

TEST_CASE("tube volume is monotone in r") {
    const Domain disk = Domain::disk();
    const auto arc = geometry::circle_arc(disk, 0.3, 2.0);
    for (Side s : {Side::inner, Side::outer, Side::both}) {
        double prev = 0.0;
        for (double r = 0.001; r < 0.5; r *= 1.7) {
            const double vol = content(arc, s, r, {}).value * r * (s == Side::both ? 2 : 1);
            CHECK(vol >= prev - 1e-9);
            prev = vol;
        }
    }
}

TEST_CASE("one-sided contents are lower semicontinuous") {
    const Domain disk = Domain::disk();
    const Domain sq = Domain::square();
    const geometry::BoundaryPatch patches[] = {geometry::circle_arc(disk, 0, 1), geometry::full_circle(disk),
                                               geometry::square_edge(sq, 1)};
    for (const auto& p : patches) {
        const double h = geometry::patch_measure(p);
        for (Side s : {Side::inner, Side::outer}) {
            const auto est = content_limit(p, s, {}, {});
            REQUIRE(est.limit);
            CHECK(*est.limit >= h - 1e-3);
            // Samples approach the measure from the side the curvature dictates, at rate O(r).
            for (const auto& smp : est.samples) CHECK(smp.value >= h - 2 * kPi * smp.r);
        }
    }
}

TEST_CASE("weak convergence against surface measure") {
    const auto circle = geometry::full_circle(Domain::disk());
    const auto one = weak_convergence_check(circle, Side::inner, testfn::constant(1.0), {}, {});
    const auto plain = content_limit(circle, Side::inner, {}, {});
    REQUIRE(one.estimate.limit);
    REQUIRE(plain.limit);
    CHECK(*one.estimate.limit == doctest::Approx(*plain.limit).epsilon(1e-9));
    CHECK(one.target == doctest::Approx(2 * kPi).epsilon(1e-12));
    const auto x1 = weak_convergence_check(circle, Side::inner, testfn::monomial(1, 0), {}, {});
    REQUIRE(x1.estimate.limit);
    CHECK(std::abs(*x1.estimate.limit) <= 1e-6);
    CHECK(std::abs(x1.target) <= 1e-12);
    for (Side s : {Side::inner, Side::outer}) {
        const auto x2 = weak_convergence_check(circle, s, testfn::monomial(2, 0), {}, {});
        REQUIRE(x2.estimate.limit);
        CHECK(std::abs(*x2.estimate.limit - kPi) <= 1e-3);
        CHECK(std::abs(x2.target - kPi) <= 1e-8);
    }
}
