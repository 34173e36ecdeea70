/// @file test_transport.cpp
/// @brief Stripe cascade: exact permutations, square vortices, pull-back evaluation, residuals.

#include <doctest.h>

#include "tracelab/error.hpp"
#include "tracelab/rng.hpp"
#include "tracelab/test_functions.hpp"
#include "tracelab/transport.hpp"

#include <cmath>
#include <vector>

using namespace tracelab;
using namespace tracelab::transport;

namespace {

// Independent permutation oracle: enumerate the blocks of slab k and rotate
// each one by 180 degrees in grid coordinates.
std::vector<std::int8_t> rotate_blocks(const DyadicPattern& p, int k) {
    const long h = 1L << (p.resolution() - k - 1);
    const long cols = static_cast<long>(p.columns());
    const long rows = static_cast<long>(p.rows());
    std::vector<std::int8_t> out = p.values();
    for (long bx = h; bx + 2 * h <= cols; bx += 4 * h) {
        for (long by = 0; by < rows; by += 2 * h) {
            for (long dy = 0; dy < 2 * h; ++dy) {
                for (long dx = 0; dx < 2 * h; ++dx) {
                    const long src = (by + dy) * cols + (bx + dx);
                    const long dst = (by + 2 * h - 1 - dy) * cols + (bx + 2 * h - 1 - dx);
                    out[static_cast<std::size_t>(dst)] = p.values()[static_cast<std::size_t>(src)];
                }
            }
        }
    }
    return out;
}

std::string signs(const DyadicPattern& p, std::size_t row) {
    std::string s;
    for (std::size_t c = 0; c < p.columns(); ++c) s += p.at(c, row) > 0 ? '+' : '-';
    return s;
}

}  // namespace

TEST_CASE("stripe patterns") {
    CHECK(stripe_value(0, 0.25) == 1);
    CHECK(stripe_value(1, 0.75) == -1);
    for (int k = 0; k <= 10; ++k) {
        const auto p = DyadicPattern::stripes(k, std::max(k, 3));
        CHECK(p.mean([](double s) { return s; }) == 0.0);
        CHECK(p.mean([](double s) { return s * s; }) == 1.0);
    }
    CHECK(DyadicPattern::stripes(0, 0).value({0.25, 0.9}) == 1);
    CHECK(DyadicPattern::stripes(1, 4).value({0.75, 0.1}) == -1);
}

TEST_CASE("one slab merges stripes") {
    const auto p = DyadicPattern::stripes(2, 2);
    REQUIRE(p.columns() == 8);
    CHECK(signs(p, 0) == "+-+-+-+-");
    const auto q = evolve_exact(p, 1);
    CHECK(signs(q, 0) == "++--++--");
    CHECK(q.level() == 1);
    CHECK(q == DyadicPattern::stripes(1, 2));
}

TEST_CASE("constant blocks are unchanged") {
    const DyadicPattern ones(4, 6, std::vector<std::int8_t>(128 * 64, 1));
    const auto q = evolve_exact(ones, 3);
    for (auto v : q.values()) CHECK(v == 1);
}

TEST_CASE("level mismatch") {
    const auto p = DyadicPattern::stripes(3, 5);
    CHECK_THROWS_AS(evolve_exact(p, 3), Error);
    try {
        evolve_exact(p, 0);
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::level_mismatch);
    }
}

TEST_CASE("cascade equals the permutation oracle across eight slabs") {
    constexpr int res = 10;
    auto p = DyadicPattern::stripes(8, res);
    // Mark the pattern so that the permutation is visible beyond stripes.
    std::vector<std::int8_t> v = p.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (counter_hash(9, i, 0, 0) % 7 == 0) v[i] = static_cast<std::int8_t>(-v[i]);
    }
    DyadicPattern marked(8, res, v);
    for (int k = 7; k >= 0; --k) {
        const auto next = evolve_exact(p, k);
        CHECK(next.values() == rotate_blocks(p, k));
        const auto next_marked = evolve_exact(marked, k);
        CHECK(next_marked.values() == rotate_blocks(marked, k));
        std::size_t plus_a = 0, plus_b = 0;
        for (auto x : marked.values()) plus_a += x > 0;
        for (auto x : next_marked.values()) plus_b += x > 0;
        CHECK(plus_a == plus_b);
        p = next;
        marked = next_marked;
    }
    CHECK(p == DyadicPattern::stripes(0, res));
}

TEST_CASE("square vortex field") {
    CHECK(slab_field_eval(0, {1.0, 0.5}, 0.75) == Vec{});
    const Vec b = slab_field_eval(0, {1.25, 0.5}, 0.75);
    CHECK(b.x == 0.0);
    CHECK(b.y == doctest::Approx(2.0));
    const Vec top = slab_field_eval(2, {0.25 - 0.0625, 0.125 + 0.0625 * 0.5 + 0.0625}, 0.2);
    CHECK(top.y == 0.0);
    CHECK(top.x < 0.0);
    // Outside the blocks.
    CHECK(slab_field_eval(0, {0.25, 0.3}, 1.0) == Vec{});
    CHECK_THROWS_AS(slab_field_eval(1, {0.3, 0.3}, 0.75), Error);
    CHECK_THROWS_AS(slab_field_eval(1, {0.3, 0.3}, 0.25), Error);
    const Vec q = slab_field_eval(0, {1.25, 0.5}, 0.75, Turn::quarter);
    CHECK(q.y == doctest::Approx(1.0));
}

TEST_CASE("field bound across slabs") {
    double sup = 0.0;
    for (int k = 0; k <= 12; ++k) {
        const double t = 0.5 * (slab_start(k) + slab_end(k));
        for (int n = 0; n < 100000; ++n) {
            const Vec x{2.0 * counter_uniform(5, k, n, 0), counter_uniform(5, k, n, 1)};
            sup = std::max(sup, norm(slab_field_eval(k, x, t)));
        }
    }
    CHECK(sup <= 4.0);
    CHECK(sup > 3.9);
}

TEST_CASE("contour shift round trip") {
    for (int n = 0; n < 100000; ++n) {
        const int k = n % 8;
        const double h = std::ldexp(1.0, -k - 1);
        const Vec c{2 * h + 4 * h * (n % 3), h + 2 * h * (n % 5)};
        const double m = h * counter_uniform(6, n, 0, 0);
        const double sigma = 8 * m * counter_uniform(6, n, 1, 0);
        const double shift = 4 * m * counter_uniform(6, n, 2, 0);
        const Vec fwd = contour_point(c, m, sigma + shift);
        const auto cc = contour_coords(k, fwd);
        REQUIRE(cc);
        CHECK(std::abs(cc->m - m) <= 1e-12);
        const Vec back = contour_point(cc->center, cc->m, cc->sigma - shift);
        CHECK(distance(back, contour_point(c, m, sigma)) <= 1e-12);
    }
}

TEST_CASE("slab lookup") {
    CHECK(slab_of(1.0) == 0);
    CHECK(slab_of(0.75) == 0);
    CHECK(slab_of(0.5) == 1);
    CHECK(slab_of(0.3) == 1);
    CHECK(slab_of(std::ldexp(1.0, -7)) == 7);
    CHECK_THROWS_AS(slab_of(0.0), Error);
    CHECK_THROWS_AS(slab_of(1.5), Error);
}

TEST_CASE("solution at dyadic times equals the automaton") {
    for (int k = 0; k <= 8; ++k) {
        const int res = k + 2;
        const auto evolved = evolve_exact(DyadicPattern::stripes(k + 1, res), k);
        const double step = std::ldexp(1.0, -res);
        bool all = true;
        for (std::size_t r = 0; r < evolved.rows(); ++r) {
            for (std::size_t c = 0; c < evolved.columns(); ++c) {
                const Vec x{(c + 0.5) * step, (r + 0.5) * step};
                const double w = solution_eval(Solution::depauw_cascade, x, slab_end(k));
                all = all && w == evolved.at(c, r) && w == stripe_value(k, x.x);
            }
        }
        CHECK(all);
    }
}

TEST_CASE("solution values") {
    CHECK(solution_eval(Solution::trivial_zero, {0.3, 0.2}, 0.4) == 0.0);
    const int k = 2;
    const double h = std::ldexp(1.0, -k - 1);
    const Vec center{2 * h + 4 * h, h};
    const double mid = 0.5 * (slab_start(k) + slab_end(k));
    CHECK(solution_eval(Solution::depauw_cascade, center, mid) == stripe_value(k + 1, center.x));
    // Outside the blocks nothing moves during the slab.
    CHECK(solution_eval(Solution::depauw_cascade, {0.5 * h, 0.3}, mid) == stripe_value(k + 1, 0.5 * h));
    CHECK_THROWS_AS(solution_eval(Solution::depauw_cascade, {0.1, 0.1}, 0.0), Error);
}

TEST_CASE("lifted solution") {
    CHECK(lifted_solution_eval({0.3, 0.2, 0.6}, 0.5) == 0.0);
    CHECK(lifted_solution_eval({0.3, 0.2, 1.5}, 3.0) == 0.0);
    CHECK(lifted_solution_eval({0.3, 0.2, 0.3}, 0.5) == solution_eval(Solution::depauw_cascade, {0.3, 0.2}, 0.3));
    const Vec u = lift_field_eval({1.25, 0.5, 0.75});
    CHECK(u.z == 1.0);
    CHECK(u.y == doctest::Approx(2.0));
}

TEST_CASE("conserved cell averages and renormalization") {
    const auto sq = [](double s) { return s * s; };
    const auto id = [](double s) { return s; };
    for (int k = 0; k <= 12; ++k) {
        CHECK(cell_mean(Solution::depauw_cascade, slab_end(k), sq, 0) == 1.0);
        CHECK(cell_mean(Solution::depauw_cascade, slab_end(k), id, 0) == 0.0);
    }
    // Mid-slab: the moves are measure preserving.
    CHECK(cell_mean(Solution::depauw_cascade, 0.3, sq, 8) == 1.0);
    CHECK(std::abs(cell_mean(Solution::depauw_cascade, 0.3, id, 8)) <= 1e-2);
    std::vector<double> times;
    for (int k = 0; k <= 10; ++k) times.push_back(slab_end(k));
    const auto d2 = renormalization_defect(Solution::depauw_cascade, sq, times, 6);
    CHECK(d2.jump == 1.0);
    const auto d1 = renormalization_defect(Solution::depauw_cascade, id, times, 6);
    CHECK(d1.jump == 0.0);
    const auto cosb = [](double s) { return std::cos(s); };
    const auto d0 = renormalization_defect(Solution::trivial_zero, cosb, times, 6);
    CHECK(d0.jump == 0.0);
    for (double v : d0.values) CHECK(v == 1.0);
}

TEST_CASE("per-slice total variation grows like 2^k") {
    std::vector<double> lx, ly;
    for (int k = 2; k <= 10; ++k) {
        lx.push_back(k * std::log(2.0));
        ly.push_back(std::log(tv_density(k, 128)));
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= lx.size();
    my /= ly.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    CHECK(std::abs(sxy / sxx - 1.0) <= 0.1);
}

TEST_CASE("weak residuals") {
    const auto phi = testfn::separable(testfn::bump({0.9, 0.45}, 0.4), testfn::time_bump(0.1, 0.9));
    const auto zero = weak_residual(Solution::trivial_zero, phi, 5);
    CHECK(zero.value == 0.0);
    double prev = 1.0;
    for (int level = 4; level <= 7; ++level) {
        const auto r = weak_residual(Solution::depauw_cascade, phi, level);
        MESSAGE("level ", level, " residual ", r.value);
        CHECK(r.value < prev);
        prev = r.value;
    }
    CHECK(prev <= 5e-3);
    CHECK_THROWS_AS(weak_residual(Solution::depauw_cascade, phi, 4, 0.1), Error);
}
