#include "experiment_context.hpp"

#include "tracelab/error.hpp"
#include "tracelab/minkowski.hpp"
#include "tracelab/parallel.hpp"
#include "tracelab/rng.hpp"
#include "tracelab/traces.hpp"

#include <algorithm>
#include <cmath>

namespace tracelab::experiments::detail {

namespace {

using fields::Field;
using geometry::BoundaryPatch;
using geometry::Domain;
using quadrature::LimitEstimate;
using traces::TraceClass;

std::string slug(std::string_view s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            out += static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
        } else if (!out.empty() && out.back() != '-') {
            out += '-';
        }
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out;
}

Json point_json(const Vec& x) { return Json::array({x.x, x.y, x.z}); }

TraceClass parse_trace_class(const Reader& r, std::string_view key) {
    const std::string s = r.string(key);
    for (auto c : {TraceClass::attained, TraceClass::not_attained, TraceClass::inconclusive}) {
        if (traces::to_string(c) == s) return c;
    }
    r.fail(key, "unknown trace classification '" + s + "'");
}

double integral_abs_on_boundary(const Domain& domain, const TestFunction& phi, int n) {
    const auto nodes = geometry::boundary_quadrature(domain.boundary(), n);
    std::vector<double> terms;
    terms.reserve(nodes.size());
    for (const auto& node : nodes) terms.push_back(node.weight * std::abs(phi.value(node.point)));
    return pairwise_sum(terms);
}

// Candidate inward trace: extrapolated signed average, or the last sample
// when the signed average does not settle.
double candidate_at(const Field& field, const Domain& domain, const Vec& x, const Context& ctx, Json& out) {
    const auto avg = traces::signed_average(field, domain, x, ctx.schedule, ctx.options);
    out["signed_average"] = report::estimate_json(avg);
    return avg.limit ? *avg.limit : avg.samples.back().value;
}

std::function<double(const Vec&)> parse_scalar(const Reader& r, const std::optional<Field>& field,
                                               const Domain& domain) {
    const std::string kind = r.string("kind");
    std::function<double(const Vec&)> f;
    const auto need_field = [&] {
        if (!field) r.fail("kind", "scalar '" + kind + "' needs a field");
    };
    if (kind == "constant") {
        const double c = r.number("value");
        f = [c](const Vec&) { return c; };
    } else if (kind == "coordinate" || kind == "component" || kind == "abs-component") {
        const auto axis = r.integer("axis");
        if (axis < 0 || axis > 2) r.fail("axis", "expected 0, 1 or 2");
        const auto pick = [axis](const Vec& v) { return axis == 0 ? v.x : axis == 1 ? v.y : v.z; };
        if (kind == "coordinate") {
            f = [pick](const Vec& x) { return pick(x); };
        } else {
            need_field();
            const Field u = *field;
            if (kind == "component") {
                f = [u, pick](const Vec& x) { return pick(u.eval(x)); };
            } else {
                f = [u, pick](const Vec& x) { return std::abs(pick(u.eval(x))); };
            }
        }
    } else if (kind == "normal-flux" || kind == "abs-normal-flux") {
        need_field();
        const Field u = *field;
        const bool take_abs = kind == "abs-normal-flux";
        f = [u, domain, take_abs](const Vec& x) {
            const double v = dot(u.eval(x), geometry::grad_distance_ae(domain, x));
            return take_abs ? std::abs(v) : v;
        };
    } else {
        r.fail("kind", "unknown scalar kind '" + kind + "'");
    }
    r.finish();
    return f;
}

}  // namespace

// ---------------------------------------------------------------------------

void run_gauss_green(Context& ctx) {
    const Domain domain = config::parse_domain(ctx.root.object("domain"));
    const Field field = config::parse_field(ctx.root.object("field"));
    const double trace_value = ctx.root.number("trace_value", 1.0);
    const Reader gen = ctx.root.object("test_functions");
    const int count = static_cast<int>(gen.integer("count"));
    const int max_degree = static_cast<int>(gen.integer("max_degree", 2));
    const double bump_radius = gen.number("bump_radius");
    if (count < 1) gen.fail("count", "must be positive");
    if (max_degree < 0 || max_degree > 8) gen.fail("max_degree", "must lie in 0..8");
    if (!(bump_radius > 0.0)) gen.fail("bump_radius", "must be positive");
    gen.finish();
    const int boundary_nodes = static_cast<int>(ctx.root.integer("boundary_nodes", 1 << 14));
    const Reader target = ctx.root.object("target");
    const double max_rel = target.number("max_relative_residual");
    target.finish();
    ctx.root.finish();

    // Monomials x^a y^b with a + b <= max_degree, times bumps centred at
    // evenly spaced boundary points.
    std::vector<std::pair<int, int>> powers;
    for (int deg = 0; deg <= max_degree; ++deg) {
        for (int a = deg; a >= 0; --a) powers.emplace_back(a, deg - a);
    }
    const auto centers = geometry::boundary_quadrature(domain.boundary(), count);
    std::vector<TestFunction> fns;
    for (int i = 0; i < count; ++i) {
        const auto [a, b] = powers[static_cast<std::size_t>(i) % powers.size()];
        fns.push_back(testfn::product(testfn::monomial(a, b), testfn::bump(centers[static_cast<std::size_t>(i)].point,
                                                                           bump_radius)));
    }
    const auto res = traces::gauss_green_residual(field, field.divergence_info(), domain,
                                                  [trace_value](const Vec&) { return trace_value; }, fns, ctx.options,
                                                  boundary_nodes);
    Json rows = Json::array();
    double worst = 0.0;
    for (std::size_t i = 0; i < res.size(); ++i) {
        const double scale = integral_abs_on_boundary(domain, fns[i], boundary_nodes);
        const double rel = res[i].residual / scale;
        worst = std::max(worst, rel);
        rows.push_back({{"test_function", res[i].test_function},
                        {"pairing", res[i].pairing},
                        {"boundary", res[i].boundary},
                        {"residual", res[i].residual},
                        {"relative_residual", rel},
                        {"error", res[i].error}});
    }
    ctx.results["residuals"] = rows;
    ctx.check("max relative residual", worst, max_rel, worst <= max_rel);
}

void run_trace_blowup(Context& ctx) {
    const Domain domain = config::parse_domain(ctx.root.object("domain"));
    const Field field = config::parse_field(ctx.root.object("field"));
    struct PointSpec {
        Vec x;
        std::optional<double> candidate;
        std::optional<TraceClass> expect;
    };
    std::vector<PointSpec> points;
    for (const auto& p : ctx.root.objects("points")) {
        PointSpec s{p.point("x"), std::nullopt, std::nullopt};
        if (p.has("candidate")) s.candidate = p.number("candidate");
        if (p.has("expect")) s.expect = parse_trace_class(p, "expect");
        p.finish();
        points.push_back(s);
    }
    struct Props {
        int eikonal = 0;
        double eikonal_tol = 1e-6;
        int projection = 0;
        double projection_tol = 1e-15;
        int periodicity = 0;
        int pairing = 0;
        double pairing_tol = 0.0;
        struct PairingCase {
            std::string name;
            Domain domain;
            Field field;
            Vec lo, hi;
            double max_radius;
        };
        std::vector<PairingCase> pairing_cases;
    } props;
    if (ctx.root.has("properties")) {
        const Reader pr = ctx.root.object("properties");
        if (pr.has("eikonal")) {
            const Reader e = pr.object("eikonal");
            props.eikonal = static_cast<int>(e.integer("points_per_domain"));
            props.eikonal_tol = e.number("tolerance", props.eikonal_tol);
            e.finish();
        }
        if (pr.has("projection")) {
            const Reader e = pr.object("projection");
            props.projection = static_cast<int>(e.integer("points"));
            props.projection_tol = e.number("tolerance", props.projection_tol);
            e.finish();
        }
        if (pr.has("periodicity")) {
            const Reader e = pr.object("periodicity");
            props.periodicity = static_cast<int>(e.integer("points"));
            e.finish();
        }
        if (pr.has("divergence_free_pairing")) {
            const Reader e = pr.object("divergence_free_pairing");
            props.pairing = static_cast<int>(e.integer("test_functions"));
            if (props.pairing < 1) e.fail("test_functions", "must be positive");
            props.pairing_tol = e.number("quadrature_tol", ctx.options.tol);
            if (!(props.pairing_tol > 0.0)) e.fail("quadrature_tol", "must be positive");
            for (const auto& c : e.objects("cases")) {
                Props::PairingCase pc{c.string("name"), config::parse_domain(c.object("domain")),
                                      config::parse_field(c.object("field")), c.point("lo"), c.point("hi"),
                                      c.number("max_radius")};
                if (!(pc.max_radius > 0.0)) c.fail("max_radius", "must be positive");
                if (pc.field.divergence_info().tag != fields::DivergenceInfo::Tag::zero)
                    c.fail("field", "the field is not divergence-free");
                c.finish();
                props.pairing_cases.push_back(std::move(pc));
            }
            e.finish();
        }
        pr.finish();
    }
    ctx.root.finish();

    Json rows = Json::array();
    for (std::size_t i = 0; i < points.size(); ++i) {
        Json row{{"point", point_json(points[i].x)}};
        const double f = points[i].candidate ? *points[i].candidate
                                             : candidate_at(field, domain, points[i].x, ctx, row);
        const auto s = traces::blowup_profile(field, domain, points[i].x, f, ctx.schedule, ctx.options);
        row["candidate"] = s.candidate;
        row["outward_trace"] = s.outward();
        row["classification"] = std::string(traces::to_string(s.classification));
        row["threshold"] = s.threshold;
        ctx.profile("point-" + std::to_string(i), s.profile);
        if (points[i].expect) {
            ctx.check("classification at point " + std::to_string(i),
                      std::string(traces::to_string(s.classification)),
                      std::string(traces::to_string(*points[i].expect)), s.classification == *points[i].expect);
        }
        rows.push_back(row);
    }
    ctx.results["points"] = rows;

    const Domain planar[] = {Domain::disk(), Domain::square(), Domain::half_plane_window(), Domain::half_disk()};
    if (props.eikonal > 0) {
        double worst = 0.0;
        int checked = 0;
        for (std::size_t di = 0; di < std::size(planar); ++di) {
            const Domain& d = planar[di];
            const double h = 1e-6 * d.diameter();
            const auto box = d.bounding_box();
            int here = 0;
            for (std::uint64_t i = 0; here < props.eikonal && i < 100u * static_cast<std::uint64_t>(props.eikonal);
                 ++i) {
                const Vec x{box.lo.x + (box.hi.x - box.lo.x) * counter_uniform(ctx.seed, 1000 + di, i, 0),
                            box.lo.y + (box.hi.y - box.lo.y) * counter_uniform(ctx.seed, 1000 + di, i, 1)};
                if (!d.contains(x) || geometry::distance(d, x) < 10 * h) continue;
                const auto p0 = geometry::project_boundary(d, x);
                bool smooth = p0.has_value();
                for (const Vec off : {Vec{h, 0}, Vec{-h, 0}, Vec{0, h}, Vec{0, -h}}) {
                    const auto p1 = geometry::project_boundary(d, x + 100.0 * off);
                    if (!p0 || !p1 || distance(*p0, *p1) > 1e-2) smooth = false;
                }
                if (!smooth) continue;
                const double gx = (geometry::distance(d, x + Vec{h, 0}) - geometry::distance(d, x - Vec{h, 0})) / (2 * h);
                const double gy = (geometry::distance(d, x + Vec{0, h}) - geometry::distance(d, x - Vec{0, h})) / (2 * h);
                worst = std::max(worst, std::abs(std::hypot(gx, gy) - 1.0));
                ++here;
                ++checked;
            }
        }
        ctx.results["eikonal"] = {{"points", checked}, {"max_deviation", worst}};
        ctx.check("eikonal |grad d| = 1", worst, props.eikonal_tol,
                  worst <= props.eikonal_tol && checked == props.eikonal * static_cast<int>(std::size(planar)));
    }
    if (props.projection > 0) {
        double worst = 0.0;
        int checked = 0;
        for (std::size_t di = 0; di < std::size(planar); ++di) {
            const Domain& d = planar[di];
            const auto box = d.bounding_box();
            for (int i = 0; i < props.projection; ++i) {
                const Vec x{box.lo.x + (box.hi.x - box.lo.x) * counter_uniform(ctx.seed, 2000 + di, i, 0),
                            box.lo.y + (box.hi.y - box.lo.y) * counter_uniform(ctx.seed, 2000 + di, i, 1)};
                const auto p = geometry::project_boundary(d, x);
                if (!p) continue;
                const auto pp = geometry::project_boundary(d, *p);
                if (!pp) {
                    worst = std::max(worst, 1.0);
                    continue;
                }
                worst = std::max(worst, distance(*p, *pp));
                ++checked;
            }
        }
        ctx.results["projection"] = {{"points", checked}, {"max_displacement", worst}};
        ctx.check("projection is idempotent", worst, props.projection_tol, worst <= props.projection_tol);
    }
    if (props.periodicity > 0) {
        const Field tiled = Field::tiled();
        int checked = 0, skipped = 0, mismatches = 0;
        for (int n = 0; n < props.periodicity; ++n) {
            const int k = static_cast<int>(counter_hash(ctx.seed, 3000, n, 0) % 16);
            const double x = std::ldexp(static_cast<double>(counter_hash(ctx.seed, 3000, n, 1) >> 24), -40) - 8.0;
            const double y = std::ldexp(1.0, -k) * counter_uniform(ctx.seed, 3000, n, 2);
            try {
                if (!(tiled.eval({x + std::ldexp(1.0, -k - 1), y}) == tiled.eval({x, y}))) ++mismatches;
                ++checked;
            } catch (const Error& e) {
                if (e.code() != ErrorCode::on_null_set && e.code() != ErrorCode::outside_domain) throw;
                ++skipped;
            }
        }
        ctx.results["periodicity"] = {{"points", checked}, {"null_set_skips", skipped}, {"mismatches", mismatches}};
        ctx.check("tiled field periodic in x (exact)", mismatches, 0, mismatches == 0 && checked > 0);
    }
    if (props.pairing > 0) {
        quadrature::Options po = ctx.options;
        po.tol = props.pairing_tol;
        Json rows_p = Json::array();
        for (std::size_t ci = 0; ci < props.pairing_cases.size(); ++ci) {
            const auto& pc = props.pairing_cases[ci];
            bool ok = true;
            for (int n = 0; n < props.pairing; ++n) {
                const std::uint64_t key = 4000 + ci;
                const Vec c{pc.lo.x + (pc.hi.x - pc.lo.x) * counter_uniform(ctx.seed, key, n, 0),
                            pc.lo.y + (pc.hi.y - pc.lo.y) * counter_uniform(ctx.seed, key, n, 1),
                            pc.lo.z + (pc.hi.z - pc.lo.z) * counter_uniform(ctx.seed, key, n, 2)};
                const double radius = pc.max_radius * (0.5 + 0.5 * counter_uniform(ctx.seed, key, n, 3));
                const auto phi = testfn::product(testfn::bump(c, radius), testfn::monomial(n % 3, n % 2));
                const auto p =
                    traces::distributional_pairing(pc.field, pc.field.divergence_info(), pc.domain, phi, po);
                ok = ok && std::abs(p.value) <= p.error;
                rows_p.push_back(
                    {{"case", pc.name}, {"test_function", phi.name}, {"value", p.value}, {"error", p.error}});
            }
            ctx.check("divergence-free pairing within quadrature bound: " + pc.name, props.pairing,
                      "|value| <= error", ok);
        }
        ctx.results["divergence_free_pairing"] = rows_p;
    }
}

void run_tubular(Context& ctx) {
    const Domain domain = config::parse_domain(ctx.root.object("domain"));
    std::optional<Field> field;
    if (ctx.root.has("field")) field = config::parse_field(ctx.root.object("field"));
    const auto scalar = parse_scalar(ctx.root.object("scalar"), field, domain);
    const BoundaryPatch patch = config::parse_patch(ctx.root.object("patch"), domain);
    const TestFunction phi = ctx.root.has("test_function")
                                 ? config::parse_test_function(ctx.root.object("test_function"))
                                 : testfn::constant(1.0);
    const Reader target = ctx.root.object("target");
    const double value = target.number("value");
    const double tol = target.number("tolerance");
    target.finish();
    ctx.root.finish();

    const auto est = traces::tubular_pairing(scalar, patch, phi, ctx.schedule, ctx.options);
    ctx.profile("tubular", est);
    const auto& last = est.samples.back();
    ctx.results["smallest_radius"] = {{"r", last.r}, {"value", last.value}, {"error", last.error}};
    ctx.check("tubular average at smallest radius", last.value, {{"value", value}, {"tolerance", tol}},
              std::abs(last.value - value) <= tol);
}

void run_minkowski(Context& ctx) {
    struct CheckSpec {
        std::string name;
        std::string kind;
        Domain domain;
        BoundaryPatch patch;
        minkowski::Side side;
        double r;
        std::optional<TestFunction> phi;
        std::optional<double> expected;
        double tolerance;
    };
    std::vector<CheckSpec> specs;
    for (const auto& c : ctx.root.objects("checks")) {
        const std::string kind = c.string("kind");
        if (kind != "content" && kind != "limit" && kind != "weak") c.fail("kind", "expected content, limit or weak");
        const Domain d = config::parse_domain(c.object("domain"));
        const std::string side_name = c.string("side", "inner");
        const auto side = minkowski::side_from_string(side_name);
        if (!side) c.fail("side", "unknown side '" + side_name + "'");
        CheckSpec s{c.string("name"), kind, d, config::parse_patch(c.object("patch"), d), *side, 0.0,
                    std::nullopt, std::nullopt, c.number("tolerance")};
        if (kind == "content") {
            s.r = c.number("r");
            if (!(s.r > 0.0)) c.fail("r", "must be positive");
            s.expected = c.number("expected");
        } else if (c.has("expected")) {
            s.expected = c.number("expected");
        }
        if (kind == "weak") s.phi = config::parse_test_function(c.object("test_function"));
        c.finish();
        specs.push_back(std::move(s));
    }
    ctx.root.finish();

    Json rows = Json::array();
    for (const auto& s : specs) {
        Json row{{"name", s.name}, {"kind", s.kind}, {"side", std::string(minkowski::to_string(s.side))}};
        double value = 0.0;
        double expected = 0.0;
        bool have = true;
        if (s.kind == "content") {
            const auto c = minkowski::content(s.patch, s.side, s.r, ctx.options);
            value = c.value;
            expected = *s.expected;
            row["r"] = s.r;
            row["error"] = c.error;
        } else if (s.kind == "limit") {
            const auto est = minkowski::content_limit(s.patch, s.side, ctx.schedule, ctx.options);
            ctx.profile(slug(s.name), est);
            have = est.limit.has_value();
            value = have ? *est.limit : 0.0;
            expected = s.expected ? *s.expected : geometry::patch_measure(s.patch);
        } else {
            const auto w = minkowski::weak_convergence_check(s.patch, s.side, *s.phi, ctx.schedule, ctx.options);
            ctx.profile(slug(s.name), w.estimate);
            have = w.estimate.limit.has_value();
            value = have ? *w.estimate.limit : 0.0;
            expected = s.expected ? *s.expected : w.target;
        }
        row["value"] = have ? Json(value) : Json(nullptr);
        row["expected"] = expected;
        rows.push_back(row);
        ctx.check(s.name, row["value"], {{"value", expected}, {"tolerance", s.tolerance}},
                  have && std::abs(value - expected) <= s.tolerance);
    }
    ctx.results["checks"] = rows;
}

void run_tiled_liminf(Context& ctx) {
    fields::BaseCell cell;
    if (ctx.root.has("cell")) {
        const Reader c = ctx.root.object("cell");
        cell.p = static_cast<int>(c.integer("p", cell.p));
        cell.q = static_cast<int>(c.integer("q", cell.q));
        cell.amp = c.number("amplitude", cell.amp);
        if (cell.p < 1 || cell.q < 1) c.fail("p", "frequencies must be positive integers");
        c.finish();
    }
    const Domain domain = ctx.root.has("domain") ? config::parse_domain(ctx.root.object("domain"))
                                                 : Domain::half_plane_window();
    if (domain.kind() != geometry::DomainKind::half_plane_window)
        ctx.root.fail("domain", "the tiled field lives on a half-plane window");
    const auto xs = ctx.root.numbers("points");
    const double floor = ctx.root.number("floor");
    const bool with_signed = ctx.root.boolean("signed_average", true);
    const Reader base = ctx.root.object("base_cell");
    const double base_expected = base.number("expected");
    const double base_tol = base.number("tolerance");
    const double base_quad_tol = base.number("quadrature_tol", 1e-10);
    base.finish();
    const Reader pr = ctx.root.object("pairing");
    std::vector<TestFunction> fns;
    for (const auto& f : pr.objects("test_functions")) fns.push_back(config::parse_test_function(f));
    const auto tols = pr.numbers("tolerances");
    const double max_abs = pr.number("max_abs");
    if (tols.empty()) pr.fail("tolerances", "need at least one tolerance");
    pr.finish();
    ctx.root.finish();

    const Field u = Field::tiled(cell);

    // Base-cell constant: int over (0,1) x (1,2) of |v . e2|.
    const Domain q = Domain::square({0.0, 1.0}, 1.0, 1.0);
    quadrature::Options bo = ctx.options;
    bo.mode = quadrature::Mode::deterministic;
    bo.tol = base_quad_tol;
    const auto bc = quadrature::integrate(
        [&](const Vec& x) { return std::abs(fields::base_cell_eval(cell, x.x, x.y).y); },
        {q, quadrature::WholeDomain{}, std::nullopt}, bo);
    ctx.results["base_cell_constant"] = {{"value", bc.value}, {"error", bc.error}};
    ctx.check("base-cell constant", bc.value, {{"value", base_expected}, {"tolerance", base_tol}},
              std::abs(bc.value - base_expected) <= base_tol);

    Json rows = Json::array();
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const Vec x{xs[i], 0.0};
        Json row{{"point", point_json(x)}};
        const auto s = traces::blowup_profile(u, domain, x, 0.0, ctx.schedule, ctx.options);
        ctx.profile("point-" + std::to_string(i), s.profile);
        double lowest = INFINITY;
        for (const auto& smp : s.profile.samples) lowest = std::min(lowest, smp.value - smp.error);
        row["lowest_sample"] = lowest;
        row["classification"] = std::string(traces::to_string(s.classification));
        if (with_signed) {
            const auto avg = traces::signed_average(u, domain, x, ctx.schedule, ctx.options);
            row["signed_average"] = report::estimate_json(avg);
        }
        rows.push_back(row);
        ctx.check("blow-up floor at x = " + report::format_double(xs[i]), lowest, floor, lowest >= floor);
        ctx.check("no Lebesgue trace at x = " + report::format_double(xs[i]),
                  std::string(traces::to_string(s.classification)),
                  std::string(traces::to_string(TraceClass::not_attained)),
                  s.classification == TraceClass::not_attained);
    }
    ctx.results["points"] = rows;

    Json pairs = Json::array();
    for (const auto& phi : fns) {
        Json row{{"test_function", phi.name}, {"levels", Json::array()}};
        bool ok = true;
        double prev = INFINITY;
        for (double t : tols) {
            quadrature::Options o = ctx.options;
            o.tol = t;
            const auto p = traces::distributional_pairing(u, u.divergence_info(), domain, phi, o);
            const double bound = std::abs(p.value) + p.error;
            row["levels"].push_back({{"tol", t}, {"value", p.value}, {"error", p.error}, {"bound", bound}});
            ok = ok && std::abs(p.value) <= max_abs && bound < prev;
            prev = bound;
        }
        ctx.check("distributional pairing vanishes for " + phi.name, row["levels"], max_abs, ok);
        pairs.push_back(row);
    }
    ctx.results["pairings"] = pairs;
}

void run_radial_dirac(Context& ctx) {
    const Domain domain = config::parse_domain(ctx.root.object("domain"));
    const Field field = config::parse_field(ctx.root.object("field"));
    if (!field.singular_point()) ctx.root.fail("field", "expected a field with a point singularity");
    const auto levels = ctx.root.integers("bump_levels");
    for (int j : levels) {
        if (j < 1 || j > 30) ctx.root.fail("bump_levels", "levels must lie in 1..30");
    }
    const Vec trace_point = ctx.root.point("trace_point");
    const Reader target = ctx.root.object("target");
    const double mass = target.number("mass");
    const double rel = target.number("relative_tolerance");
    const double trace_tol = target.number("trace_tolerance");
    target.finish();
    ctx.root.finish();

    const Vec c = *field.singular_point();
    std::vector<quadrature::Sample> samples;
    Json rows = Json::array();
    for (int j : levels) {
        const double delta = std::ldexp(1.0, -j);
        const auto phi = testfn::bump(c, delta);
        const auto p = traces::distributional_pairing(field, field.divergence_info(), domain, phi, ctx.options);
        samples.push_back({delta, p.value, p.error});
        // Against its Lebesgue trace (zero) the Gauss-Green residual is |pairing|.
        rows.push_back({{"level", j}, {"radius", delta}, {"pairing", p.value}, {"error", p.error},
                        {"gauss_green_residual", std::abs(p.value)}});
        ctx.check("pairing at support radius 2^-" + std::to_string(j), p.value,
                  {{"value", mass}, {"relative_tolerance", rel}}, std::abs(p.value - mass) <= rel * std::abs(mass));
    }
    ctx.results["pairings"] = rows;
    ctx.profile("pairing", quadrature::classify_samples(samples));

    Json tr{{"point", point_json(trace_point)}};
    const double f = candidate_at(field, domain, trace_point, ctx, tr);
    const auto s = traces::blowup_profile(field, domain, trace_point, f, ctx.schedule, ctx.options);
    ctx.profile("trace", s.profile);
    tr["candidate"] = f;
    tr["classification"] = std::string(traces::to_string(s.classification));
    ctx.results["lebesgue_trace"] = tr;
    ctx.check("Lebesgue trace vanishes", f, {{"value", 0.0}, {"tolerance", trace_tol}},
              std::abs(f) <= trace_tol && s.classification == TraceClass::attained);
}

void run_signed_flux(Context& ctx) {
    const Domain domain = config::parse_domain(ctx.root.object("domain"));
    const BoundaryPatch patch = config::parse_patch(ctx.root.object("patch"), domain);
    struct Case {
        std::string name;
        Field field;
        traces::FluxSign sign;
        double expected;
        double tolerance;
    };
    std::vector<Case> cases;
    for (const auto& c : ctx.root.objects("cases")) {
        const std::string sign = c.string("sign");
        if (sign != "positive" && sign != "negative") c.fail("sign", "expected positive or negative");
        cases.push_back({c.string("name"), config::parse_field(c.object("field")),
                         sign == "positive" ? traces::FluxSign::positive : traces::FluxSign::negative,
                         c.number("expected"), c.number("tolerance")});
        c.finish();
    }
    ctx.root.finish();

    for (const auto& c : cases) {
        const auto est = traces::signed_flux(c.field, domain, patch, c.sign, ctx.schedule, ctx.options);
        ctx.profile(slug(c.name), est);
        const bool have = est.limit.has_value();
        ctx.check(c.name, have ? Json(*est.limit) : Json(nullptr),
                  {{"value", c.expected}, {"tolerance", c.tolerance}},
                  have && std::abs(*est.limit - c.expected) <= c.tolerance);
    }
}

void run_gluing(Context& ctx) {
    const Domain domain = config::parse_domain(ctx.root.object("domain"));
    std::vector<TestFunction> fns;
    for (const auto& f : ctx.root.objects("test_functions")) fns.push_back(config::parse_test_function(f));
    const int nodes = static_cast<int>(ctx.root.integer("boundary_nodes", 64));
    if (nodes < 1) ctx.root.fail("boundary_nodes", "must be positive");
    struct Case {
        std::string name;
        Field inside;
        Field outside;
        std::optional<double> density;
        double tolerance;
    };
    std::vector<Case> cases;
    for (const auto& c : ctx.root.objects("cases")) {
        Case k{c.string("name"), config::parse_field(c.object("inside")), config::parse_field(c.object("outside")),
               std::nullopt, c.number("tolerance")};
        if (c.has("expected_density")) k.density = c.number("expected_density");
        c.finish();
        cases.push_back(std::move(k));
    }
    ctx.root.finish();

    Json out = Json::array();
    for (const auto& c : cases) {
        const auto res = traces::gluing_surface_divergence(c.inside, c.outside, domain, fns, ctx.schedule,
                                                           ctx.options, nodes);
        Json rows = Json::array();
        double worst = 0.0;
        bool density_ok = true;
        for (const auto& g : res) {
            worst = std::max(worst, std::abs(g.measured - g.predicted));
            if (c.density && g.boundary_mass != 0.0)
                density_ok = density_ok && std::abs(g.predicted_density - *c.density) <= c.tolerance;
            rows.push_back({{"test_function", g.test_function},
                            {"measured", g.measured},
                            {"predicted", g.predicted},
                            {"boundary_mass", g.boundary_mass},
                            {"measured_density", g.measured_density},
                            {"predicted_density", g.predicted_density},
                            {"error", g.error}});
        }
        out.push_back({{"name", c.name}, {"pairings", rows}});
        ctx.check(c.name, worst, {{"max_abs_difference", c.tolerance}}, worst <= c.tolerance && density_ok);
    }
    ctx.results["cases"] = out;
}

void run_chain_rule(Context& ctx) {
    const Domain domain = config::parse_domain(ctx.root.object("domain"));
    const BoundaryPatch patch = config::parse_patch(ctx.root.object("patch"), domain);
    const int nodes = static_cast<int>(ctx.root.integer("nodes", 8));
    if (nodes < 1) ctx.root.fail("nodes", "must be positive");
    struct Case {
        std::string name;
        Field field;
        TestFunction rho;
        config::ScalarMap beta;
        double tolerance;
    };
    std::vector<Case> cases;
    for (const auto& c : ctx.root.objects("cases")) {
        cases.push_back({c.string("name"), config::parse_field(c.object("field")),
                         config::parse_test_function(c.object("rho")), config::parse_beta(c.object("beta")),
                         c.number("tolerance")});
        c.finish();
    }
    ctx.root.finish();

    Json out = Json::array();
    for (const auto& c : cases) {
        const auto r = traces::chain_rule_check(c.field, c.rho.value, c.beta.f, domain, patch, nodes, ctx.schedule,
                                                ctx.options);
        out.push_back({{"name", c.name},
                       {"rho", c.rho.name},
                       {"beta", c.beta.name},
                       {"max_residual", r.max_residual},
                       {"mean_residual", r.mean_residual},
                       {"nodes", r.nodes},
                       {"excluded", r.excluded}});
        ctx.check(c.name, r.max_residual, c.tolerance, r.max_residual <= c.tolerance);
    }
    ctx.results["cases"] = out;
}

void run_lift_trace(Context& ctx) {
    const Domain domain = ctx.root.has("domain") ? config::parse_domain(ctx.root.object("domain"))
                                                 : Domain::half_space_window();
    if (domain.kind() != geometry::DomainKind::half_space_window)
        ctx.root.fail("domain", "the lifted field lives on a half-space window");
    const BoundaryPatch patch = config::parse_patch(ctx.root.object("patch"), domain);
    const int nodes = static_cast<int>(ctx.root.integer("nodes", 4));
    if (nodes < 1) ctx.root.fail("nodes", "must be positive");
    const Reader target = ctx.root.object("target");
    const double expected = target.number("outward_trace");
    const double tol = target.number("tolerance");
    target.finish();
    std::optional<TestFunction> res_phi;
    std::vector<int> res_levels;
    if (ctx.root.has("residual")) {
        const Reader r = ctx.root.object("residual");
        res_phi = config::parse_test_function(r.object("test_function"));
        res_levels = r.integers("levels");
        for (int l : res_levels) {
            if (l < 1 || l > 10) r.fail("levels", "levels must lie in 1..10");
        }
        r.finish();
    }
    ctx.root.finish();

    const Field u = Field::depauw_lift();
    const auto rep = traces::boundary_trace_field(u, domain, patch, nodes, ctx.schedule, ctx.options);
    Json rows = Json::array();
    double worst = 0.0;
    bool attained = true;
    for (std::size_t i = 0; i < rep.samples.size(); ++i) {
        const auto& s = rep.samples[i];
        worst = std::max(worst, std::abs(s.outward() - expected));
        attained = attained && s.classification == TraceClass::attained;
        rows.push_back({{"point", point_json(s.point)},
                        {"outward_trace", s.outward()},
                        {"classification", std::string(traces::to_string(s.classification))}});
        ctx.profile("node-" + std::to_string(i), s.profile);
    }
    ctx.results["nodes"] = rows;
    ctx.results["attained_fraction"] = rep.attained_fraction;
    ctx.check("outward trace on the bottom face", worst, {{"value", expected}, {"tolerance", tol}},
              worst <= tol && attained);
    if (res_phi) {
        Json lr = Json::array();
        for (int l : res_levels) {
            const auto r = transport::lift_residual(*res_phi, l);
            lr.push_back({{"level", l}, {"value", r.value}, {"evaluations", r.evaluations}});
        }
        ctx.results["boundary_pairing"] = {{"test_function", res_phi->name}, {"levels", lr}};
    }
}

}  // namespace tracelab::experiments::detail
