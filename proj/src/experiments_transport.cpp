#include "experiment_context.hpp"

#include "tracelab/error.hpp"
#include "tracelab/rng.hpp"
#include "tracelab/transport.hpp"

#include <algorithm>
#include <cmath>

namespace tracelab::experiments::detail {

namespace {

using transport::DyadicPattern;
using transport::Solution;

std::string pattern_hash(const DyadicPattern& p) {
    const auto& v = p.values();
    return report::sha256_hex(std::string_view(reinterpret_cast<const char*>(v.data()), v.size()));
}

/// Least-squares slope of y against x.
double fitted_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(y.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    return sxy / sxx;
}

Solution parse_solution(const Reader& r, std::string_view key) {
    const std::string name = r.string(key);
    const auto w = transport::solution_from_string(name);
    if (!w) r.fail(key, "unknown solution '" + name + "'");
    return *w;
}

}  // namespace

void run_depauw_nonuniqueness(Context& ctx) {
    const Reader perm = ctx.root.object("permutation");
    const int resolution = static_cast<int>(perm.integer("resolution"));
    const int slabs = static_cast<int>(perm.integer("slabs"));
    if (slabs < 1 || slabs > 16) perm.fail("slabs", "must lie in 1..16");
    if (resolution < slabs || resolution > 12) perm.fail("resolution", "must lie in slabs..12");
    perm.finish();
    int snapshot_resolution = 0;
    if (ctx.root.has("snapshots")) {
        const Reader s = ctx.root.object("snapshots");
        snapshot_resolution = static_cast<int>(s.integer("resolution"));
        if (snapshot_resolution < slabs || snapshot_resolution > 12)
            s.fail("resolution", "must lie in slabs..12");
        s.finish();
    }
    const Reader res = ctx.root.object("residuals");
    std::vector<SpaceTimeTestFunction> fns;
    for (const auto& f : res.objects("test_functions")) fns.push_back(config::parse_space_time_test_function(f));
    const auto levels = res.integers("levels");
    if (levels.size() < 2) res.fail("levels", "need at least two levels");
    for (int l : levels) {
        if (l < 1 || l > 12) res.fail("levels", "levels must lie in 1..12");
    }
    const double t_cut = res.number("t_cut", 0.0);
    for (int l : levels) {
        const double first = std::ldexp(t_cut, l);
        if (!(t_cut >= 0.0 && t_cut < 1.0) || first != std::floor(first))
            res.fail("t_cut", "must be a multiple of 2^-level in [0, 1) for every level");
    }
    const double max_residual = res.number("max_residual");
    const double min_rate = res.number("min_rate");
    res.finish();
    const Reader mom = ctx.root.object("moments");
    const int max_level = static_cast<int>(mom.integer("max_level"));
    if (max_level < 0 || max_level > 30) mom.fail("max_level", "must lie in 0..30");
    mom.finish();
    const Reader dist = ctx.root.object("distance");
    const auto times = dist.numbers("times");
    if (times.empty()) dist.fail("times", "need at least one time");
    for (double t : times) {
        if (!(t > 0.0 && t <= 1.0)) dist.fail("times", "times must lie in (0, 1]");
    }
    const int dist_resolution = static_cast<int>(dist.integer("resolution", 10));
    if (dist_resolution < 1 || dist_resolution > 12) dist.fail("resolution", "must lie in 1..12");
    const double expected_distance = dist.number("expected");
    dist.finish();
    ctx.root.finish();

    // (a) Block rotations as cell permutations, from level `slabs` down to 0.
    {
        DyadicPattern p = DyadicPattern::stripes(slabs, resolution);
        Json rows = Json::array();
        rows.push_back({{"level", slabs}, {"sha256", pattern_hash(p)}});
        bool ok = true;
        for (int k = slabs - 1; k >= 0; --k) {
            p = transport::evolve_exact(p, k);
            const bool same = p == DyadicPattern::stripes(k, resolution);
            ok = ok && same;
            rows.push_back({{"level", k}, {"slab", k}, {"sha256", pattern_hash(p)}, {"equals_stripes", same}});
        }
        ctx.results["permutation"] = {{"resolution", resolution},
                                      {"columns", p.columns()},
                                      {"rows", p.rows()},
                                      {"patterns", rows}};
        ctx.check("block rotations reproduce the stripe cascade", ok, true, ok);
    }
    if (snapshot_resolution > 0) {
        DyadicPattern p = DyadicPattern::stripes(slabs, snapshot_resolution);
        for (int k = slabs;; --k) {
            ctx.file("pattern-level-" + std::to_string(k) + ".pgm", report::pattern_pgm(p));
            ctx.file("pattern-level-" + std::to_string(k) + ".csv", report::pattern_csv(p));
            if (k == 0) break;
            p = transport::evolve_exact(p, k - 1);
        }
    }

    // (b) Weak residuals of both solutions.
    std::string csv = "solution,test_function,level,residual\n";
    Json out = Json::array();
    for (Solution w : {Solution::trivial_zero, Solution::depauw_cascade}) {
        for (const auto& phi : fns) {
            std::vector<double> lv, lr;
            Json rows = Json::array();
            double worst = 0.0;
            bool all_zero = true;
            for (int l : levels) {
                const auto r = transport::weak_residual(w, phi, l, t_cut);
                worst = std::max(worst, r.value);
                all_zero = all_zero && r.value == 0.0;
                lv.push_back(l);
                lr.push_back(std::log2(std::max(r.value, 1e-300)));
                rows.push_back({{"level", l}, {"residual", r.value}, {"evaluations", r.evaluations}});
                csv += std::string(transport::to_string(w)) + "," + phi.name + "," + std::to_string(l) + "," +
                       report::format_double(r.value) + "\n";
            }
            const Json rate = all_zero ? Json(nullptr) : Json(-fitted_slope(lv, lr));
            out.push_back({{"solution", std::string(transport::to_string(w))},
                           {"test_function", phi.name},
                           {"levels", rows},
                           {"rate", rate}});
            const std::string what = std::string(transport::to_string(w)) + " weak residual for " + phi.name;
            ctx.check(what, {{"max", worst}, {"rate", rate}},
                      {{"max", max_residual}, {"min_rate", min_rate}},
                      worst <= max_residual && (all_zero || rate.get<double>() >= min_rate));
        }
    }
    ctx.results["residuals"] = out;
    ctx.file("residuals.csv", csv);

    // (c) Moments at dyadic times.
    {
        const auto square = [](double s) { return s * s; };
        const auto identity = [](double s) { return s; };
        Json rows = Json::array();
        bool ok = true;
        for (int k = 0; k <= max_level; ++k) {
            const double t = std::ldexp(1.0, -k);
            const double m2 = transport::cell_mean(Solution::depauw_cascade, t, square, dist_resolution);
            const double m1 = transport::cell_mean(Solution::depauw_cascade, t, identity, dist_resolution);
            ok = ok && m2 == 1.0 && m1 == 0.0;
            rows.push_back({{"t", t}, {"mean_square", m2}, {"mean", m1}});
        }
        ctx.results["moments"] = rows;
        ctx.check("cell means of w^2 and w at dyadic times", ok, true, ok);
    }

    // (d) Per-cell L2 distance between the two solutions.
    {
        Json rows = Json::array();
        double largest = 0.0;
        bool ok = true;
        for (double t : times) {
            const double d2 = transport::cell_mean(Solution::depauw_cascade, t, [](double s) { return s * s; },
                                                   dist_resolution);
            const double d = std::sqrt(d2);
            largest = std::max(largest, d);
            ok = ok && d == expected_distance;
            rows.push_back({{"t", t}, {"distance", d}});
        }
        ctx.results["distance"] = {{"times", rows}, {"max", largest}};
        ctx.check("L2 distance between the two solutions", largest, expected_distance, ok);
    }
}

void run_renormalization_defect(Context& ctx) {
    struct Case {
        std::string name;
        Solution w;
        config::ScalarMap beta;
        double expected;
        double tolerance;
    };
    std::vector<Case> cases;
    for (const auto& c : ctx.root.objects("cases")) {
        cases.push_back({c.string("name"), parse_solution(c, "solution"), config::parse_beta(c.object("beta")),
                         c.number("expected_jump"), c.number("tolerance", 0.0)});
        c.finish();
    }
    const auto times = ctx.root.numbers("times");
    for (double t : times) {
        if (!(t > 0.0 && t <= 1.0)) ctx.root.fail("times", "times must lie in (0, 1]");
    }
    const int resolution = static_cast<int>(ctx.root.integer("resolution", 10));
    if (resolution < 1 || resolution > 12) ctx.root.fail("resolution", "must lie in 1..12");
    const Reader fb = ctx.root.object("field_bound");
    const int max_slab = static_cast<int>(fb.integer("max_slab"));
    const auto points = fb.integer("points");
    const double bound = fb.number("bound");
    if (max_slab < 0 || max_slab > 40) fb.fail("max_slab", "must lie in 0..40");
    if (points < 1) fb.fail("points", "must be positive");
    fb.finish();
    const Reader tv = ctx.root.object("total_variation");
    const auto tv_levels = tv.integers("levels");
    const int tv_n = static_cast<int>(tv.integer("n", 128));
    const double tv_slope = tv.number("slope");
    const double tv_tol = tv.number("tolerance");
    if (tv_levels.size() < 2) tv.fail("levels", "need at least two levels");
    for (int k : tv_levels) {
        if (k < 0 || k > 16) tv.fail("levels", "levels must lie in 0..16");
    }
    if (tv_n < 2) tv.fail("n", "must be at least 2");
    tv.finish();
    ctx.root.finish();

    Json out = Json::array();
    for (const auto& c : cases) {
        const auto rep = transport::renormalization_defect(c.w, c.beta.f, times, resolution);
        Json rows = Json::array();
        for (std::size_t i = 0; i < rep.times.size(); ++i) rows.push_back({{"t", rep.times[i]}, {"mean", rep.values[i]}});
        out.push_back({{"name", c.name},
                       {"solution", std::string(transport::to_string(c.w))},
                       {"beta", c.beta.name},
                       {"initial_value", rep.initial_value},
                       {"means", rows},
                       {"jump", rep.jump}});
        ctx.check(c.name, rep.jump, {{"value", c.expected}, {"tolerance", c.tolerance}},
                  std::abs(rep.jump - c.expected) <= c.tolerance);
    }
    ctx.results["cases"] = out;

    double sup = 0.0;
    for (std::int64_t i = 0; i < points; ++i) {
        const auto u = static_cast<std::uint64_t>(i);
        const int k = static_cast<int>(counter_hash(ctx.seed, 5000, u, 0) % static_cast<std::uint64_t>(max_slab + 1));
        const double t = transport::slab_start(k) + transport::slab_duration(k) * counter_uniform(ctx.seed, 5000, u, 1);
        const Vec x{transport::kCellWidth * counter_uniform(ctx.seed, 5000, u, 2),
                    transport::kCellHeight * counter_uniform(ctx.seed, 5000, u, 3)};
        sup = std::max(sup, norm(transport::slab_field_eval(k, x, t)));
    }
    ctx.results["field_bound"] = {{"points", points}, {"max_norm", sup}};
    ctx.check("field bound", sup, bound, sup <= bound);

    std::vector<double> lk, lt;
    Json rows = Json::array();
    for (int k : tv_levels) {
        const double d = transport::tv_density(k, tv_n);
        lk.push_back(k);
        lt.push_back(std::log2(d));
        rows.push_back({{"slab", k}, {"tv_density", d}});
    }
    const double slope = fitted_slope(lk, lt);
    ctx.results["total_variation"] = {{"levels", rows}, {"slope", slope}};
    ctx.check("total variation growth per slab (log2 slope)", slope, {{"value", tv_slope}, {"tolerance", tv_tol}},
              std::abs(slope - tv_slope) <= tv_tol);
}

}  // namespace tracelab::experiments::detail
