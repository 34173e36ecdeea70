#include "tracelab/config.hpp"

#include "tracelab/error.hpp"

#include <cmath>
#include <sstream>

namespace tracelab::config {

Reader::Reader(const Json& node, std::string path) : node_(&node), path_(std::move(path)) {
    if (!node.is_object()) throw Error(ErrorCode::bad_config, "config key '" + path_ + "': expected an object");
}

std::string Reader::key_path(std::string_view key) const {
    if (path_.empty()) return std::string(key);
    return path_ + "." + std::string(key);
}

void Reader::fail(std::string_view key, std::string_view message) const {
    throw Error(ErrorCode::bad_config, "config key '" + key_path(key) + "': " + std::string(message));
}

bool Reader::has(std::string_view key) const {
    used_.insert(std::string(key));
    return node_->contains(key);
}

const Json& Reader::at(std::string_view key) const {
    used_.insert(std::string(key));
    const auto it = node_->find(key);
    if (it == node_->end()) fail(key, "missing required key");
    return *it;
}

double Reader::number(std::string_view key) const {
    const Json& v = at(key);
    if (!v.is_number()) fail(key, "expected a number");
    const double x = v.get<double>();
    if (!std::isfinite(x)) fail(key, "expected a finite number");
    return x;
}

double Reader::number(std::string_view key, double fallback) const { return has(key) ? number(key) : fallback; }

std::int64_t Reader::integer(std::string_view key) const {
    const Json& v = at(key);
    if (!v.is_number_integer()) fail(key, "expected an integer");
    return v.get<std::int64_t>();
}

std::int64_t Reader::integer(std::string_view key, std::int64_t fallback) const {
    return has(key) ? integer(key) : fallback;
}

std::string Reader::string(std::string_view key) const {
    const Json& v = at(key);
    if (!v.is_string()) fail(key, "expected a string");
    return v.get<std::string>();
}

std::string Reader::string(std::string_view key, std::string_view fallback) const {
    return has(key) ? string(key) : std::string(fallback);
}

bool Reader::boolean(std::string_view key, bool fallback) const {
    if (!has(key)) return fallback;
    const Json& v = at(key);
    if (!v.is_boolean()) fail(key, "expected true or false");
    return v.get<bool>();
}

std::vector<double> Reader::numbers(std::string_view key) const {
    const Json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
        if (!e.is_number() || !std::isfinite(e.get<double>())) fail(key, "expected an array of numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

std::vector<int> Reader::integers(std::string_view key) const {
    const Json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of integers");
    std::vector<int> out;
    for (const auto& e : v) {
        if (!e.is_number_integer()) fail(key, "expected an array of integers");
        out.push_back(e.get<int>());
    }
    return out;
}

Vec Reader::point(std::string_view key) const {
    const auto xs = numbers(key);
    if (xs.size() != 2 && xs.size() != 3) fail(key, "expected 2 or 3 coordinates");
    return {xs[0], xs[1], xs.size() == 3 ? xs[2] : 0.0};
}

Reader Reader::object(std::string_view key) const {
    const Json& v = at(key);
    if (!v.is_object()) fail(key, "expected an object");
    return Reader(v, key_path(key));
}

std::vector<Reader> Reader::objects(std::string_view key) const {
    const Json& v = at(key);
    if (!v.is_array()) fail(key, "expected an array of objects");
    std::vector<Reader> out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        const std::string p = key_path(key) + "[" + std::to_string(i) + "]";
        if (!v[i].is_object()) throw Error(ErrorCode::bad_config, "config key '" + p + "': expected an object");
        out.emplace_back(v[i], p);
    }
    return out;
}

void Reader::finish() const {
    for (const auto& [key, value] : node_->items()) {
        if (!used_.count(key)) fail(key, "unknown key");
    }
}

// ---------------------------------------------------------------------------

geometry::Domain parse_domain(const Reader& r) {
    using geometry::Domain;
    using geometry::DomainKind;
    const std::string name = r.string("kind");
    const auto kind = geometry::domain_kind_from_string(name);
    if (!kind) r.fail("kind", "unknown domain kind '" + name + "'");
    Domain d = Domain::disk();
    try {
    switch (*kind) {
        case DomainKind::unit_disk:
            d = Domain::disk(r.has("center") ? r.point("center") : Vec{}, r.number("radius", 1.0));
            break;
        case DomainKind::half_disk:
            d = Domain::half_disk(r.has("center") ? r.point("center") : Vec{}, r.number("radius", 1.0));
            break;
        case DomainKind::unit_square:
            d = Domain::square(r.has("lower_left") ? r.point("lower_left") : Vec{}, r.number("width", 1.0),
                               r.number("height", 1.0));
            break;
        case DomainKind::half_plane_window:
            d = Domain::half_plane_window(r.number("x0", -1.0), r.number("x1", 2.0), r.number("height", 1.0));
            break;
        case DomainKind::half_space_window:
            d = Domain::half_space_window(r.number("x0", -1.0), r.number("x1", 1.0), r.number("y0", -1.0),
                                          r.number("y1", 1.0), r.number("height", 1.0));
            break;
    }
    } catch (const Error& e) {
        if (e.code() == ErrorCode::bad_config) throw;
        r.fail("kind", e.what());
    }
    r.finish();
    return d;
}

namespace {

fields::Polynomial parse_polynomial(const Reader& r) {
    fields::Polynomial p;
    p.dim = static_cast<int>(r.integer("dim", 2));
    if (p.dim != 2 && p.dim != 3) r.fail("dim", "expected 2 or 3");
    const auto comps = r.objects("components");
    if (static_cast<int>(comps.size()) != p.dim) r.fail("components", "expected one entry per dimension");
    for (std::size_t c = 0; c < comps.size(); ++c) {
        for (const auto& term : comps[c].objects("terms")) {
            const auto pw = term.integers("powers");
            if (pw.size() < 2 || pw.size() > 3) term.fail("powers", "expected 2 or 3 exponents");
            for (int e : pw) {
                if (e < 0) term.fail("powers", "exponents must be nonnegative");
            }
            p.components[c].push_back({term.number("coeff"), pw[0], pw[1], pw.size() == 3 ? pw[2] : 0});
            term.finish();
        }
        comps[c].finish();
    }
    return p;
}

}  // namespace

fields::Field parse_field(const Reader& r) {
    using fields::Field;
    using fields::FieldKind;
    const std::string name = r.string("kind");
    const auto kind = fields::field_kind_from_string(name);
    if (!kind) r.fail("kind", "unknown field kind '" + name + "'");
    Field f = Field::rotation();
    switch (*kind) {
        case FieldKind::polynomial: f = Field::polynomial(parse_polynomial(r)); break;
        case FieldKind::rotation: f = Field::rotation(); break;
        case FieldKind::radial: f = Field::radial(r.has("center") ? r.point("center") : Vec{}); break;
        case FieldKind::shear: {
            const std::string prof = r.string("profile", "sin-inverse");
            const auto p = fields::shear_profile_from_string(prof);
            if (!p) r.fail("profile", "unknown shear profile '" + prof + "'");
            f = Field::shear(*p, r.number("amplitude", 1.0));
            break;
        }
        case FieldKind::tiled: {
            fields::BaseCell cell;
            if (r.has("cell")) {
                const Reader c = r.object("cell");
                cell.p = static_cast<int>(c.integer("p", cell.p));
                cell.q = static_cast<int>(c.integer("q", cell.q));
                cell.amp = c.number("amplitude", cell.amp);
                if (cell.p < 1 || cell.q < 1) c.fail("p", "frequencies must be positive integers");
                c.finish();
            }
            f = Field::tiled(cell);
            break;
        }
        case FieldKind::depauw_slab: f = Field::depauw_slab(); break;
        case FieldKind::depauw_lift: f = Field::depauw_lift(); break;
    }
    r.finish();
    return f;
}

geometry::BoundaryPatch parse_patch(const Reader& r, const geometry::Domain& domain) {
    const std::string kind = r.string("kind");
    const auto guard = [&](auto&& make) {
        try {
            return make();
        } catch (const Error& e) {
            r.fail("kind", e.what());
        }
    };
    geometry::BoundaryPatch p = guard([&] {
        if (kind == "boundary") return domain.boundary();
        if (kind == "full-circle") return geometry::full_circle(domain);
        if (kind == "circle-arc") return geometry::circle_arc(domain, r.number("theta0"), r.number("theta1"));
        if (kind == "flat-segment") return geometry::flat_segment(domain, r.number("x0"), r.number("x1"));
        if (kind == "square-edge") return geometry::square_edge(domain, static_cast<int>(r.integer("edge")));
        if (kind == "bottom-face")
            return geometry::bottom_face(domain, r.number("x0"), r.number("x1"), r.number("y0"), r.number("y1"));
        r.fail("kind", "unknown patch kind '" + kind + "'");
    });
    r.finish();
    return p;
}

TestFunction parse_test_function(const Reader& r) {
    const std::string kind = r.string("kind");
    TestFunction f;
    if (kind == "constant") {
        f = testfn::constant(r.number("value", 1.0));
    } else if (kind == "bump") {
        const double radius = r.number("radius");
        if (!(radius > 0.0)) r.fail("radius", "must be positive");
        f = testfn::bump(r.point("center"), radius);
    } else if (kind == "plateau") {
        const double inner = r.number("inner");
        const double outer = r.number("outer");
        if (!(inner > 0.0 && outer > inner)) r.fail("outer", "need 0 < inner < outer");
        f = testfn::plateau(r.point("center"), inner, outer);
    } else if (kind == "monomial") {
        const auto pw = r.integers("powers");
        if (pw.size() < 2 || pw.size() > 3) r.fail("powers", "expected 2 or 3 exponents");
        for (int e : pw) {
            if (e < 0) r.fail("powers", "exponents must be nonnegative");
        }
        f = testfn::monomial(pw[0], pw[1], pw.size() == 3 ? pw[2] : 0, r.has("shift") ? r.point("shift") : Vec{});
    } else if (kind == "product") {
        const auto factors = r.objects("factors");
        if (factors.empty()) r.fail("factors", "need at least one factor");
        f = parse_test_function(factors[0]);
        for (std::size_t i = 1; i < factors.size(); ++i) f = testfn::product(f, parse_test_function(factors[i]));
    } else {
        r.fail("kind", "unknown test function kind '" + kind + "'");
    }
    if (r.has("scale")) f = testfn::scaled(f, r.number("scale"));
    r.finish();
    return f;
}

SpaceTimeTestFunction parse_space_time_test_function(const Reader& r) {
    const TestFunction space = parse_test_function(r.object("space"));
    const Reader t = r.object("time");
    const std::string kind = t.string("kind");
    const double a = t.number("start");
    const double b = t.number("end");
    if (!(b > a)) t.fail("end", "need start < end");
    TimeProfile profile;
    if (kind == "bump") {
        profile = testfn::time_bump(a, b);
    } else if (kind == "cutoff") {
        profile = testfn::time_cutoff(a, b);
    } else {
        t.fail("kind", "unknown time profile '" + kind + "'");
    }
    t.finish();
    r.finish();
    return testfn::separable(space, profile);
}

ScalarMap parse_beta(const Reader& r) {
    const std::string kind = r.string("kind");
    ScalarMap m;
    if (kind == "power") {
        const auto n = r.integer("exponent");
        if (n < 1 || n > 8) r.fail("exponent", "expected an integer in 1..8");
        m.name = "s^" + std::to_string(n);
        const int e = static_cast<int>(n);
        m.f = [e](double s) { return std::pow(s, e); };
    } else if (kind == "cos") {
        m.name = "cos(s)";
        m.f = [](double s) { return std::cos(s); };
    } else if (kind == "exp") {
        m.name = "exp(s)";
        m.f = [](double s) { return std::exp(s); };
    } else {
        r.fail("kind", "unknown function kind '" + kind + "'");
    }
    r.finish();
    return m;
}

quadrature::RadiusSchedule parse_schedule(const Reader& r) {
    quadrature::RadiusSchedule s;
    s.r0 = r.number("r0", s.r0);
    s.ratio = r.number("ratio", s.ratio);
    s.count = static_cast<int>(r.integer("count", s.count));
    if (!(s.r0 > 0.0)) r.fail("r0", "must be positive");
    if (!(s.ratio > 0.0 && s.ratio < 1.0)) r.fail("ratio", "must lie in (0, 1)");
    if (s.count < 4 || s.count > 60) r.fail("count", "must lie in 4..60");
    r.finish();
    return s;
}

quadrature::Options parse_quadrature(const Reader& r, quadrature::Options o) {
    if (r.has("mode")) {
        const std::string m = r.string("mode");
        const auto mode = quadrature::mode_from_string(m);
        if (!mode) r.fail("mode", "unknown quadrature mode '" + m + "'");
        o.mode = *mode;
    }
    o.tol = r.number("tol", o.tol);
    if (!(o.tol > 0.0)) r.fail("tol", "must be positive");
    const auto budget = r.integer("max_evaluations", static_cast<std::int64_t>(o.max_evaluations));
    if (budget < 1) r.fail("max_evaluations", "must be positive");
    o.max_evaluations = static_cast<std::size_t>(budget);
    o.gauss_order = static_cast<int>(r.integer("gauss_order", o.gauss_order));
    if (o.gauss_order < 1 || o.gauss_order > 8) r.fail("gauss_order", "must lie in 1..8");
    o.initial_cells = static_cast<int>(r.integer("initial_cells", o.initial_cells));
    if (o.initial_cells < 1 || o.initial_cells > 1024) r.fail("initial_cells", "must lie in 1..1024");
    r.finish();
    return o;
}

}  // namespace tracelab::config
