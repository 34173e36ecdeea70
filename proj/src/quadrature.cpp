#include "tracelab/quadrature.hpp"

#include "tracelab/error.hpp"
#include "tracelab/parallel.hpp"
#include "tracelab/rng.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <sstream>

namespace tracelab::quadrature {

using geometry::Arc;
using geometry::Face;
using geometry::Segment;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kSingularFloor = 0x1.0p-40;

// ---------------------------------------------------------------------------
// Gauss-Legendre rules on [0, 1]
// ---------------------------------------------------------------------------

struct Rule {
    std::vector<double> nodes;
    std::vector<double> weights;
};

Rule make_gauss_legendre(int n) {
    Rule rule;
    rule.nodes.resize(static_cast<std::size_t>(n));
    rule.weights.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0;
            double p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        if (n == 1) {
            x = 0.0;
            dp = 1.0;
        }
        const double w = n == 1 ? 2.0 : 2.0 / ((1.0 - x * x) * dp * dp);
        rule.nodes[static_cast<std::size_t>(i)] = 0.5 * (1.0 - x);
        rule.weights[static_cast<std::size_t>(i)] = 0.5 * w;
    }
    return rule;
}

const Rule& gauss_rule(int n) {
    static const std::array<Rule, 12> rules = [] {
        std::array<Rule, 12> r;
        for (int i = 1; i < 12; ++i) r[static_cast<std::size_t>(i)] = make_gauss_legendre(i);
        return r;
    }();
    if (n < 1 || n > 11) throw Error(ErrorCode::bad_region, "gauss_order must be in 1..11");
    return rules[static_cast<std::size_t>(n)];
}

// ---------------------------------------------------------------------------
// Chart pieces
// ---------------------------------------------------------------------------

// The first dim-1 parameters select a base point and a direction; the last
// one runs along that direction.
enum class Chart { ruled, polar, spherical, cylindrical };
enum class Radial { plain, bounded, logarithmic };

using Bounds = std::function<std::pair<double, double>(const Vec& base, const Vec& dir)>;

struct Piece {
    Chart chart = Chart::ruled;
    int dim = 2;
    Vec origin;
    std::array<Vec, 3> frame{Vec{1, 0, 0}, Vec{0, 1, 0}, Vec{0, 0, 1}};
    std::array<double, 3> lo{};
    std::array<double, 3> hi{};
    Radial radial = Radial::plain;
    Bounds bounds;
    double log_r0 = 0.0;
    std::function<bool(const Vec&)> indicator;
};

struct Ray {
    Vec base;
    Vec dir;
};

Ray outer_map(const Piece& p, const double* u) {
    switch (p.chart) {
        case Chart::ruled: {
            Vec base = p.origin;
            for (int k = 0; k < p.dim - 1; ++k) base += u[k] * p.frame[static_cast<std::size_t>(k)];
            return {base, p.frame[static_cast<std::size_t>(p.dim - 1)]};
        }
        case Chart::polar:
            return {p.origin, {std::cos(u[0]), std::sin(u[0]), 0.0}};
        case Chart::cylindrical:
            return {p.origin + u[0] * p.frame[0], std::cos(u[1]) * p.frame[1] + std::sin(u[1]) * p.frame[2]};
        case Chart::spherical: {
            const double mu = u[1];
            const double st = std::sqrt(std::max(0.0, 1.0 - mu * mu));
            return {p.origin, {st * std::cos(u[0]), st * std::sin(u[0]), mu}};
        }
    }
    return {};
}

int radial_power(Chart c) {
    switch (c) {
        case Chart::ruled: return 0;
        case Chart::polar:
        case Chart::cylindrical: return 1;
        case Chart::spherical: return 2;
    }
    return 0;
}

// Tensor Gauss-Legendre over one parameter box of a piece.
double box_integral(const Piece& p, const Integrand& f, const double* lo, const double* hi, const Rule& rule,
                    std::size_t& evals) {
    const int d = p.dim;
    const std::size_t n = rule.nodes.size();
    const int power = radial_power(p.chart);
    double outer_volume = 1.0;
    for (int k = 0; k < d; ++k) outer_volume *= (hi[k] - lo[k]);
    if (outer_volume == 0.0) return 0.0;

    double total = 0.0;
    std::array<std::size_t, 2> idx{0, 0};
    const std::size_t outer_count = d == 2 ? n : n * n;
    for (std::size_t o = 0; o < outer_count; ++o) {
        idx[0] = o % n;
        idx[1] = o / n;
        double u[3];
        double w_outer = 1.0;
        for (int k = 0; k < d - 1; ++k) {
            const std::size_t i = idx[static_cast<std::size_t>(k)];
            u[k] = lo[k] + (hi[k] - lo[k]) * rule.nodes[i];
            w_outer *= rule.weights[i];
        }
        const Ray ray = outer_map(p, u);
        double a = 0.0;
        double b = 0.0;
        if (p.radial == Radial::bounded) {
            std::tie(a, b) = p.bounds(ray.base, ray.dir);
            if (!(b > a)) continue;
        }
        const int last = d - 1;
        double inner = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = lo[last] + (hi[last] - lo[last]) * rule.nodes[i];
            double s = c;
            double ds = 1.0;
            if (p.radial == Radial::bounded) {
                s = a + c * (b - a);
                ds = b - a;
            } else if (p.radial == Radial::logarithmic) {
                s = p.log_r0 * std::exp2(-c);
                ds = s * std::numbers::ln2;
            }
            const Vec x = ray.base + s * ray.dir;
            if (p.indicator && !p.indicator(x)) continue;
            double jac = ds;
            for (int k = 0; k < power; ++k) jac *= s;
            const double v = f(x);
            ++evals;
            if (!std::isfinite(v)) {
                std::ostringstream os;
                os.precision(17);
                os << "integrand is not finite at (" << x.x << "," << x.y << "," << x.z << ")";
                throw Error(ErrorCode::on_null_set, os.str());
            }
            inner += rule.weights[i] * v * jac;
        }
        total += w_outer * inner;
    }
    return total * outer_volume;
}

// ---------------------------------------------------------------------------
// Region decomposition
// ---------------------------------------------------------------------------

std::pair<double, double> inside_bounds(const Domain& dom, const Vec& base, const Vec& dir, double r) {
    const auto ray = dom.ray_interval(base, dir);
    if (!ray) return {0.0, 0.0};
    return {std::max(0.0, ray->lo), std::min(r, ray->hi)};
}

// Portion [0, r] of the ray outside the closed domain, as two intervals.
// Rays that only graze the closure count as misses.
bool misses(const std::optional<geometry::RayInterval>& ray, double r) {
    return !ray || ray->hi <= 1e-12 * r || ray->hi - ray->lo <= 1e-12 * r;
}

std::pair<double, double> outside_near(const Domain& dom, const Vec& base, const Vec& dir, double r) {
    const auto ray = dom.ray_interval(base, dir);
    if (misses(ray, r)) return {0.0, r};
    return {0.0, std::min(r, std::max(0.0, ray->lo))};
}

std::pair<double, double> outside_far(const Domain& dom, const Vec& base, const Vec& dir, double r) {
    const auto ray = dom.ray_interval(base, dir);
    if (misses(ray, r)) return {0.0, 0.0};
    return {std::min(r, std::max(0.0, ray->hi)), r};
}

enum class Side { inner, outer, both };

// For a center on a circular part of the boundary the side of each ray is
// decided by its direction against the inward normal: the domains are convex
// and the center is only known to within rounding, so grazing rays must not
// switch sides at angles unrelated to the cell layout.
std::optional<Vec> arc_anchor(const Domain& dom, const Vec& c) {
    const double tol = 1e-12 * (1.0 + dom.diameter());
    if (dom.dim() != 2 || geometry::distance(dom, c) > tol) return std::nullopt;
    const Vec rel = c - dom.anchor();
    switch (dom.kind()) {
        case geometry::DomainKind::unit_disk: break;
        case geometry::DomainKind::half_disk:
            if (rel.y <= 1e-9 || std::abs(norm(rel) - dom.radius()) > tol) return std::nullopt;
            break;
        default: return std::nullopt;
    }
    return -1.0 * (rel / norm(rel));
}

std::pair<double, double> anchored_inside(const Domain& dom, const Vec& n, const Vec& base, const Vec& dir, double r) {
    if (dot(dir, n) <= 0.0) return {0.0, 0.0};
    const auto ray = dom.ray_interval(base, dir);
    return {0.0, ray ? std::clamp(ray->hi, 0.0, r) : 0.0};
}

std::pair<double, double> anchored_far(const Domain& dom, const Vec& n, const Vec& base, const Vec& dir, double r) {
    if (dot(dir, n) <= 0.0) return {0.0, r};
    const auto ray = dom.ray_interval(base, dir);
    return {ray ? std::clamp(ray->hi, 0.0, r) : 0.0, r};
}

// Pushes `p` with the last coordinate restricted to the requested side of
// the domain along each ray (one piece, or two for the outer side).
void push_sided(std::vector<Piece>& out, Piece p, const Domain& dom, double r, Side side,
                std::optional<Vec> inward = std::nullopt) {
    const int last = p.dim - 1;
    p.lo[static_cast<std::size_t>(last)] = 0.0;
    p.hi[static_cast<std::size_t>(last)] = 1.0;
    p.radial = Radial::bounded;
    if (inward && side != Side::both) {
        const Vec n = *inward;
        if (side == Side::inner) {
            p.bounds = [dom, n, r](const Vec& b, const Vec& d) { return anchored_inside(dom, n, b, d, r); };
        } else {
            p.bounds = [dom, n, r](const Vec& b, const Vec& d) { return anchored_far(dom, n, b, d, r); };
        }
        out.push_back(p);
        return;
    }
    switch (side) {
        case Side::inner:
            p.bounds = [dom, r](const Vec& b, const Vec& d) { return inside_bounds(dom, b, d, r); };
            out.push_back(p);
            break;
        case Side::outer:
            p.bounds = [dom, r](const Vec& b, const Vec& d) { return outside_near(dom, b, d, r); };
            out.push_back(p);
            p.bounds = [dom, r](const Vec& b, const Vec& d) { return outside_far(dom, b, d, r); };
            out.push_back(p);
            break;
        case Side::both:
            p.radial = Radial::plain;
            p.hi[static_cast<std::size_t>(last)] = r;
            out.push_back(p);
            break;
    }
}

// Pieces covering {x on `side` : |x - center| < r, direction in [a0, a1]}.
void add_polar_sector(std::vector<Piece>& out, const Domain& dom, Vec center, double a0, double a1, double r,
                      Side side, std::function<bool(const Vec&)> indicator) {
    Piece p;
    p.chart = Chart::polar;
    p.dim = 2;
    p.origin = center;
    p.lo = {a0, 0.0, 0.0};
    p.hi = {a1, 1.0, 0.0};
    p.indicator = indicator;
    push_sided(out, p, dom, r, side, arc_anchor(dom, center));
}

void add_spherical_ball(std::vector<Piece>& out, const Domain& dom, Vec center, double r, Side side) {
    Piece p;
    p.chart = Chart::spherical;
    p.dim = 3;
    p.origin = center;
    p.lo = {0.0, -1.0, 0.0};
    p.hi = {kTwoPi, 1.0, 1.0};
    push_sided(out, p, dom, r, side);
}

// Angle at which a polar chart about `c` should start so that the directions
// tangent to a flat boundary through c fall on initial cell boundaries.
double start_angle(const Domain& dom, const Vec& c) {
    if (geometry::distance(dom, c) > 1e-12 * (1.0 + dom.diameter())) return 0.0;
    const Vec n = dom.outward_normal(c);
    return std::atan2(-n.y, -n.x) - 0.5 * kPi;
}

void build_ball(std::vector<Piece>& out, const Domain& dom, const Vec& c, double radius, Side side) {
    if (!(radius > 0.0)) throw Error(ErrorCode::bad_region, "ball radius must be positive");
    if (dom.dim() == 3) {
        add_spherical_ball(out, dom, c, radius, side);
        return;
    }
    const double a0 = start_angle(dom, c);
    add_polar_sector(out, dom, c, a0, a0 + kTwoPi, radius, side, {});
}

void build_whole(std::vector<Piece>& out, const Domain& dom) {
    Piece p;
    switch (dom.kind()) {
        case geometry::DomainKind::unit_disk:
            p.chart = Chart::polar;
            p.origin = dom.anchor();
            p.lo = {0.0, 0.0, 0.0};
            p.hi = {kTwoPi, dom.radius(), 0.0};
            break;
        case geometry::DomainKind::half_disk:
            p.chart = Chart::polar;
            p.origin = dom.anchor();
            p.lo = {0.0, 0.0, 0.0};
            p.hi = {kPi, dom.radius(), 0.0};
            break;
        default: {
            const auto box = dom.bounding_box();
            p.chart = Chart::ruled;
            p.dim = dom.dim();
            p.origin = box.lo;
            const Vec ext = box.hi - box.lo;
            p.lo = {0.0, 0.0, 0.0};
            p.hi = {ext.x, ext.y, ext.z};
            break;
        }
    }
    out.push_back(p);
}

std::function<bool(const Vec&)> ownership(const BoundaryPatch& patch, std::size_t index) {
    if (patch.pieces().size() <= 1) return {};
    return [patch, index](const Vec& x) { return patch.nearest_piece(x) == index; };
}

void build_arc_tube(std::vector<Piece>& out, const Domain& dom, const Arc& arc, double r, Side side,
                    std::function<bool(const Vec&)> own) {
    Piece core;
    core.chart = Chart::polar;
    core.origin = arc.center;
    core.indicator = own;
    const double R = arc.radius;
    double s0 = side == Side::outer ? R : std::max(0.0, R - r);
    double s1 = side == Side::inner ? R : R + r;
    core.lo = {arc.theta0, s0, 0.0};
    core.hi = {arc.theta1, s1, 0.0};
    out.push_back(core);
    if (arc.theta1 - arc.theta0 >= kTwoPi) return;
    const Vec p0 = arc.center + Vec{R * std::cos(arc.theta0), R * std::sin(arc.theta0)};
    const Vec p1 = arc.center + Vec{R * std::cos(arc.theta1), R * std::sin(arc.theta1)};
    add_polar_sector(out, dom, p0, arc.theta0 + kPi, arc.theta0 + kTwoPi, r, side, own);
    add_polar_sector(out, dom, p1, arc.theta1, arc.theta1 + kPi, r, side, own);
}

void build_segment_tube(std::vector<Piece>& out, const Domain& dom, const Segment& seg, double r, Side side,
                        std::function<bool(const Vec&)> own) {
    const double len = norm(seg.b - seg.a);
    const Vec t = (seg.b - seg.a) / len;
    const Vec mid = 0.5 * (seg.a + seg.b);
    const Vec inward = -dom.outward_normal(mid);
    Piece core;
    core.chart = Chart::ruled;
    core.origin = seg.a;
    core.frame = {t, inward, Vec{0, 0, 1}};
    core.indicator = own;
    core.lo = {0.0, 0.0, 0.0};
    core.hi = {len, 1.0, 0.0};
    switch (side) {
        case Side::inner:
            core.radial = Radial::bounded;
            core.bounds = [dom, r](const Vec& b, const Vec& d) { return inside_bounds(dom, b, d, r); };
            out.push_back(core);
            break;
        case Side::outer:
            core.radial = Radial::bounded;
            core.frame[1] = -inward;
            core.bounds = [dom, r](const Vec& b, const Vec& d) { return outside_near(dom, b, d, r); };
            out.push_back(core);
            core.bounds = [dom, r](const Vec& b, const Vec& d) { return outside_far(dom, b, d, r); };
            out.push_back(core);
            break;
        case Side::both:
            core.lo[1] = -r;
            core.hi[1] = r;
            out.push_back(core);
            break;
    }
    const double ta = std::atan2(t.y, t.x);
    // Directions pointing away from the segment at each endpoint.
    add_polar_sector(out, dom, seg.a, ta + 0.5 * kPi, ta + 1.5 * kPi, r, side, own);
    add_polar_sector(out, dom, seg.b, ta - 0.5 * kPi, ta + 0.5 * kPi, r, side, own);
}

void build_face_tube(std::vector<Piece>& out, const Domain& dom, const Face& face, double r, Side side,
                     std::function<bool(const Vec&)> own) {
    const Vec ex{1, 0, 0}, ey{0, 1, 0}, ez{0, 0, 1};
    // Slab over the rectangle.
    Piece core;
    core.chart = Chart::ruled;
    core.dim = 3;
    core.origin = {face.x0, face.y0, 0.0};
    core.lo = {0.0, 0.0, 0.0};
    core.hi = {face.x1 - face.x0, face.y1 - face.y0, 1.0};
    core.indicator = own;
    if (side == Side::both) {
        core.lo[2] = -r;
        core.hi[2] = r;
        out.push_back(core);
    } else {
        core.frame[2] = side == Side::inner ? ez : -ez;
        push_sided(out, core, dom, r, side);
    }
    // Half-cylinders along the edges, directions perpendicular to the edge
    // and pointing away from the rectangle.
    const double psi0 = side == Side::outer ? -0.5 * kPi : (side == Side::inner ? 0.0 : -0.5 * kPi);
    const double psi1 = side == Side::inner ? 0.5 * kPi : (side == Side::outer ? 0.0 : 0.5 * kPi);
    const auto edge = [&](Vec origin, Vec along, double length, Vec away) {
        Piece p;
        p.chart = Chart::cylindrical;
        p.dim = 3;
        p.origin = origin;
        p.frame = {along, away, ez};
        p.lo = {0.0, psi0, 0.0};
        p.hi = {length, psi1, 1.0};
        p.indicator = own;
        push_sided(out, p, dom, r, side);
    };
    const double lx = face.x1 - face.x0;
    const double ly = face.y1 - face.y0;
    edge({face.x0, face.y0, 0}, ey, ly, -ex);
    edge({face.x1, face.y0, 0}, ey, ly, ex);
    edge({face.x0, face.y0, 0}, ex, lx, -ey);
    edge({face.x0, face.y1, 0}, ex, lx, ey);
    // Ball octants at the corners.
    const double mu0 = side == Side::inner ? 0.0 : -1.0;
    const double mu1 = side == Side::outer ? 0.0 : 1.0;
    const auto corner = [&](Vec c, double phi0) {
        Piece p;
        p.chart = Chart::spherical;
        p.dim = 3;
        p.origin = c;
        p.lo = {phi0, mu0, 0.0};
        p.hi = {phi0 + 0.5 * kPi, mu1, 1.0};
        p.indicator = own;
        push_sided(out, p, dom, r, side);
    };
    corner({face.x1, face.y1, 0}, 0.0);
    corner({face.x0, face.y1, 0}, 0.5 * kPi);
    corner({face.x0, face.y0, 0}, kPi);
    corner({face.x1, face.y0, 0}, 1.5 * kPi);
}

void build_tube(std::vector<Piece>& out, const BoundaryPatch& patch, double r, Side side) {
    if (!(r > 0.0)) throw Error(ErrorCode::bad_region, "tube radius must be positive");
    const Domain& dom = patch.parent();
    for (std::size_t i = 0; i < patch.pieces().size(); ++i) {
        auto own = ownership(patch, i);
        const auto& piece = patch.pieces()[i];
        if (const auto* arc = std::get_if<Arc>(&piece)) {
            build_arc_tube(out, dom, *arc, r, side, own);
        } else if (const auto* seg = std::get_if<Segment>(&piece)) {
            build_segment_tube(out, dom, *seg, r, side, own);
        } else {
            build_face_tube(out, dom, std::get<Face>(piece), r, side, own);
        }
    }
}

std::vector<Piece> build_pieces(const RegionSpec& region) {
    std::vector<Piece> out;
    const Domain& dom = region.base;
    std::visit(
        [&](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Ball>) {
                build_ball(out, dom, s.center, s.radius, Side::inner);
            } else if constexpr (std::is_same_v<T, BallExterior>) {
                build_ball(out, dom, s.center, s.radius, Side::outer);
            } else if constexpr (std::is_same_v<T, InnerTube>) {
                build_tube(out, s.patch, s.r, Side::inner);
            } else if constexpr (std::is_same_v<T, OuterTube>) {
                build_tube(out, s.patch, s.r, Side::outer);
            } else if constexpr (std::is_same_v<T, FullTube>) {
                build_tube(out, s.patch, s.r, Side::both);
            } else if constexpr (std::is_same_v<T, WholeDomain>) {
                build_whole(out, dom);
            } else {
                if (!(s.t1 > s.t0)) throw Error(ErrorCode::bad_region, "space-time slab needs t1 > t0");
                if (dom.kind() != geometry::DomainKind::unit_square &&
                    dom.kind() != geometry::DomainKind::half_plane_window)
                    throw Error(ErrorCode::bad_region, "space-time slabs need a box-shaped planar domain");
                const auto box = dom.bounding_box();
                Piece p;
                p.chart = Chart::ruled;
                p.dim = 3;
                p.origin = {box.lo.x, box.lo.y, s.t0};
                p.lo = {0.0, 0.0, 0.0};
                p.hi = {box.hi.x - box.lo.x, box.hi.y - box.lo.y, s.t1 - s.t0};
                out.push_back(p);
            }
        },
        region.shape);
    for (auto& p : out) {
        if (p.chart != Chart::spherical && dom.dim() == 3 && p.dim == 2) p.dim = 3;
    }
    return out;
}

// Excises a small ball around the singular point from every piece not
// already centered there and covers it with log-graded polar shells.
double apply_singular_point(std::vector<Piece>& pieces, const RegionSpec& region, const Integrand& f) {
    if (!region.singular_point) return 0.0;
    const Vec sp = *region.singular_point;
    bool needs_excision = false;
    for (const auto& p : pieces) {
        if (p.chart == Chart::ruled || p.chart == Chart::cylindrical || !(p.origin == sp)) needs_excision = true;
    }
    const int d = region.base.dim();
    const double unit_sphere = d == 2 ? kTwoPi : 4.0 * kPi;
    if (needs_excision) {
        const double rho0 = 0.125 * std::min(1.0, region.base.diameter());
        for (auto& p : pieces) {
            if ((p.chart == Chart::polar || p.chart == Chart::spherical) && p.origin == sp) continue;
            auto inner = p.indicator;
            p.indicator = [inner, sp, rho0](const Vec& x) {
                return distance(x, sp) >= rho0 && (!inner || inner(x));
            };
        }
        Piece shell;
        shell.chart = d == 2 ? Chart::polar : Chart::spherical;
        shell.dim = d;
        shell.origin = sp;
        shell.radial = Radial::logarithmic;
        shell.log_r0 = rho0;
        const double levels = std::log2(rho0 / kSingularFloor);
        if (d == 2) {
            shell.lo = {0.0, 0.0, 0.0};
            shell.hi = {kTwoPi, levels, 0.0};
        } else {
            shell.lo = {0.0, -1.0, 0.0};
            shell.hi = {kTwoPi, 1.0, levels};
        }
        shell.indicator = [region](const Vec& x) { return region_contains(region, x); };
        pieces.push_back(shell);
    }
    // Integrable tail inside the floor radius: |f| <= C |x - p|^{-(d-1)}
    // bounds the missing mass by C * |S^{d-1}| * floor.
    double c = 0.0;
    const double s = 2.0 * kSingularFloor;
    for (int k = 0; k < 16; ++k) {
        const double th = kTwoPi * (k + 0.5) / 16.0;
        for (double mu : d == 2 ? std::vector<double>{0.0} : std::vector<double>{-0.75, -0.25, 0.25, 0.75}) {
            const double st = std::sqrt(1.0 - mu * mu);
            const Vec x = d == 2 ? sp + s * Vec{std::cos(th), std::sin(th)}
                                 : sp + s * Vec{st * std::cos(th), st * std::sin(th), mu};
            if (!region_contains(region, x)) continue;
            const double v = std::abs(f(x));
            if (std::isfinite(v)) c = std::max(c, v * std::pow(s, d - 1));
        }
    }
    return 2.0 * c * unit_sphere * kSingularFloor;
}

// Approximate physical lengths of the parameter box sides.
std::array<double, 3> physical_lengths(const Piece& p) {
    std::array<double, 3> len{0, 0, 0};
    const int d = p.dim;
    const int last = d - 1;
    double radial_len = p.hi[last] - p.lo[last];
    double radial_mid = 0.5 * (p.hi[last] + p.lo[last]);
    if (p.radial == Radial::bounded) {
        radial_len = 0.0;
        radial_mid = 0.0;
        for (int i = 0; i < 5; ++i) {
            double u[3];
            for (int k = 0; k < d - 1; ++k) u[k] = p.lo[k] + (p.hi[k] - p.lo[k]) * (i + 0.5) / 5.0;
            const Ray ray = outer_map(p, u);
            const auto [a, b] = p.bounds(ray.base, ray.dir);
            if (b - a > radial_len) {
                radial_len = b - a;
                radial_mid = 0.5 * (a + b);
            }
        }
    } else if (p.radial == Radial::logarithmic) {
        radial_mid = p.log_r0;
        radial_len = p.log_r0 * (p.hi[last] - p.lo[last]) / 4.0;
    }
    for (int k = 0; k < d - 1; ++k) {
        const double span = p.hi[k] - p.lo[k];
        const bool straight = p.chart == Chart::ruled || (p.chart == Chart::cylindrical && k == 0);
        len[static_cast<std::size_t>(k)] = straight ? span : span * std::max(radial_mid, 1e-300);
    }
    len[static_cast<std::size_t>(last)] = radial_len;
    return len;
}

std::array<int, 3> initial_grid(const Piece& p, int base) {
    const auto len = physical_lengths(p);
    double lmax = 0.0;
    for (int k = 0; k < p.dim; ++k) lmax = std::max(lmax, len[static_cast<std::size_t>(k)]);
    std::array<int, 3> n{1, 1, 1};
    for (int k = 0; k < p.dim; ++k) {
        const double frac = lmax > 0.0 ? len[static_cast<std::size_t>(k)] / lmax : 1.0;
        n[static_cast<std::size_t>(k)] = std::max(1, static_cast<int>(std::ceil(base * frac)));
    }
    if (p.chart == Chart::polar || p.chart == Chart::spherical) {
        // Angular alignment: quarter turns on cell boundaries.
        const double span = p.hi[0] - p.lo[0];
        if (span > kPi + 1e-12) n[0] = std::max(4, (n[0] + 3) / 4 * 4);
        else n[0] = std::max(2, (n[0] + 1) / 2 * 2);
        if (p.chart == Chart::spherical) n[1] = std::max(2, (n[1] + 1) / 2 * 2);
    }
    if (p.radial == Radial::logarithmic) {
        n[static_cast<std::size_t>(p.dim - 1)] =
            std::max(4, static_cast<int>(std::ceil((p.hi[p.dim - 1] - p.lo[p.dim - 1]) / 2.0)));
    }
    return n;
}

// ---------------------------------------------------------------------------
// Deterministic adaptive cell tree
// ---------------------------------------------------------------------------

struct Cell {
    std::uint32_t piece = 0;
    std::array<double, 3> lo{};
    std::array<double, 3> hi{};
    double value = 0.0;
    double err = 0.0;
    std::uint8_t split = 0;
    std::size_t evals = 0;
};

void evaluate_cell(Cell& c, const std::vector<Piece>& pieces, const Integrand& f, const Rule& rule) {
    const Piece& p = pieces[c.piece];
    std::size_t evals = 0;
    const double q0 = box_integral(p, f, c.lo.data(), c.hi.data(), rule, evals);
    double best_err = -1.0;
    double best_val = q0;
    int best_dim = 0;
    for (int k = 0; k < p.dim; ++k) {
        const double mid = 0.5 * (c.lo[static_cast<std::size_t>(k)] + c.hi[static_cast<std::size_t>(k)]);
        auto lo_a = c.lo;
        auto hi_a = c.hi;
        hi_a[static_cast<std::size_t>(k)] = mid;
        auto lo_b = c.lo;
        auto hi_b = c.hi;
        lo_b[static_cast<std::size_t>(k)] = mid;
        const double qk = box_integral(p, f, lo_a.data(), hi_a.data(), rule, evals) +
                          box_integral(p, f, lo_b.data(), hi_b.data(), rule, evals);
        const double e = std::abs(qk - q0);
        if (e > best_err) {
            best_err = e;
            best_val = qk;
            best_dim = k;
        }
    }
    c.value = best_val;
    c.err = best_err;
    c.split = static_cast<std::uint8_t>(best_dim);
    c.evals = evals;
}

Result adaptive(const std::vector<Piece>& pieces, const Integrand& f, const Options& opt) {
    const Rule& rule = gauss_rule(opt.gauss_order);
    std::vector<Cell> cells;
    for (std::uint32_t pi = 0; pi < pieces.size(); ++pi) {
        const Piece& p = pieces[pi];
        const auto n = initial_grid(p, opt.initial_cells);
        for (int k = 0; k < n[2]; ++k) {
            for (int j = 0; j < n[1]; ++j) {
                for (int i = 0; i < n[0]; ++i) {
                    Cell c;
                    c.piece = pi;
                    const std::array<int, 3> ijk{i, j, k};
                    for (int dd = 0; dd < p.dim; ++dd) {
                        const auto u = static_cast<std::size_t>(dd);
                        const double h = (p.hi[u] - p.lo[u]) / n[u];
                        c.lo[u] = p.lo[u] + h * ijk[u];
                        c.hi[u] = ijk[u] + 1 == n[u] ? p.hi[u] : p.lo[u] + h * (ijk[u] + 1);
                    }
                    cells.push_back(c);
                }
            }
        }
    }
    parallel_for(cells.size(), [&](std::size_t i) { evaluate_cell(cells[i], pieces, f, rule); });

    std::size_t evals = 0;
    for (const auto& c : cells) evals += c.evals;

    bool converged = false;
    std::vector<std::size_t> order;
    for (;;) {
        std::vector<double> errs(cells.size());
        for (std::size_t i = 0; i < cells.size(); ++i) errs[i] = cells[i].err;
        const double total_err = pairwise_sum(errs);
        if (total_err <= opt.tol) {
            converged = true;
            break;
        }
        if (evals >= opt.max_evaluations) break;
        order.resize(cells.size());
        std::iota(order.begin(), order.end(), std::size_t{0});
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            if (cells[a].err != cells[b].err) return cells[a].err > cells[b].err;
            return a < b;
        });
        std::size_t take = 0;
        double acc = 0.0;
        while (take < order.size() && take < 16384 && (acc < 0.5 * total_err || take == 0)) {
            acc += cells[order[take]].err;
            ++take;
        }
        const std::size_t first_new = cells.size();
        cells.resize(first_new + take);
        for (std::size_t t = 0; t < take; ++t) {
            Cell& parent = cells[order[t]];
            const auto k = static_cast<std::size_t>(parent.split);
            const double mid = 0.5 * (parent.lo[k] + parent.hi[k]);
            Cell child = parent;
            child.lo[k] = mid;
            parent.hi[k] = mid;
            cells[first_new + t] = child;
        }
        parallel_for(2 * take, [&](std::size_t i) {
            Cell& c = i < take ? cells[order[i]] : cells[first_new + (i - take)];
            evaluate_cell(c, pieces, f, rule);
        });
        for (std::size_t t = 0; t < take; ++t) evals += cells[order[t]].evals + cells[first_new + t].evals;
    }
    std::vector<double> vals(cells.size());
    std::vector<double> errs(cells.size());
    for (std::size_t i = 0; i < cells.size(); ++i) {
        vals[i] = cells[i].value;
        errs[i] = cells[i].err;
    }
    return {pairwise_sum(vals), pairwise_sum(errs), evals, converged};
}

// ---------------------------------------------------------------------------
// Stratified Monte Carlo
// ---------------------------------------------------------------------------

Result monte_carlo(const std::vector<Piece>& pieces, const Integrand& f, const Options& opt) {
    // Stratum allocation follows the physical volume of each piece.
    std::vector<double> volumes(pieces.size());
    const Rule& vol_rule = gauss_rule(3);
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const auto n = initial_grid(pieces[i], 4);
        std::size_t dummy = 0;
        double v = 0.0;
        const Piece& p = pieces[i];
        for (int k = 0; k < n[2]; ++k) {
            for (int j = 0; j < n[1]; ++j) {
                for (int a = 0; a < n[0]; ++a) {
                    std::array<double, 3> lo{}, hi{};
                    const std::array<int, 3> ijk{a, j, k};
                    for (int dd = 0; dd < p.dim; ++dd) {
                        const auto u = static_cast<std::size_t>(dd);
                        const double h = (p.hi[u] - p.lo[u]) / n[u];
                        lo[u] = p.lo[u] + h * ijk[u];
                        hi[u] = lo[u] + h;
                    }
                    v += box_integral(p, [](const Vec&) { return 1.0; }, lo.data(), hi.data(), vol_rule, dummy);
                }
            }
        }
        volumes[i] = std::max(v, 0.0);
    }
    const double total_volume = std::accumulate(volumes.begin(), volumes.end(), 0.0);
    if (!(total_volume > 0.0)) return {0.0, 0.0, 0, true};

    std::size_t evals = 0;
    std::size_t strata_target = std::max<std::size_t>(opt.mc_initial_samples / 2, 16);
    Result best{};
    best.converged = false;
    for (std::uint64_t level = 0;; ++level) {
        double value = 0.0;
        double var = 0.0;
        std::size_t used = 0;
        for (std::size_t pi = 0; pi < pieces.size(); ++pi) {
            const Piece& p = pieces[pi];
            if (volumes[pi] == 0.0) continue;
            const double share = static_cast<double>(strata_target) * volumes[pi] / total_volume;
            const auto len = physical_lengths(p);
            double prod = 1.0;
            int active = 0;
            for (int k = 0; k < p.dim; ++k) {
                if (len[static_cast<std::size_t>(k)] > 0.0) {
                    prod *= len[static_cast<std::size_t>(k)];
                    ++active;
                }
            }
            const double cell = active > 0 ? std::pow(prod / std::max(share, 1.0), 1.0 / active) : 1.0;
            std::array<std::size_t, 3> n{1, 1, 1};
            for (int k = 0; k < p.dim; ++k) {
                const double l = len[static_cast<std::size_t>(k)];
                n[static_cast<std::size_t>(k)] = l > 0.0 ? std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(l / cell))) : 1;
            }
            const std::size_t strata = n[0] * n[1] * n[2];
            constexpr std::size_t chunk = 4096;
            const std::size_t chunks = (strata + chunk - 1) / chunk;
            std::vector<double> chunk_val(chunks), chunk_var(chunks);
            std::vector<std::size_t> chunk_evals(chunks);
            std::array<double, 3> h{};
            double stratum_volume = 1.0;
            for (int k = 0; k < p.dim; ++k) {
                const auto u = static_cast<std::size_t>(k);
                h[u] = (p.hi[u] - p.lo[u]) / static_cast<double>(n[u]);
                stratum_volume *= h[u];
            }
            const int d = p.dim;
            const int power = radial_power(p.chart);
            parallel_for(chunks, [&](std::size_t ci) {
                double sv = 0.0;
                double sq = 0.0;
                std::size_t ev = 0;
                const std::size_t end = std::min(strata, (ci + 1) * chunk);
                for (std::size_t s = ci * chunk; s < end; ++s) {
                    const std::array<std::size_t, 3> idx{s % n[0], (s / n[0]) % n[1], s / (n[0] * n[1])};
                    double fx[2];
                    for (int m = 0; m < 2; ++m) {
                        double u[3];
                        for (int k = 0; k < d; ++k) {
                            const auto uk = static_cast<std::size_t>(k);
                            const double xi = counter_uniform(opt.seed, (static_cast<std::uint64_t>(pi) << 32) | level, s,
                                                              static_cast<std::uint64_t>(4 * m + k));
                            u[k] = p.lo[uk] + h[uk] * (static_cast<double>(idx[uk]) + xi);
                        }
                        const Ray ray = outer_map(p, u);
                        double a = 0.0, b = 0.0;
                        fx[m] = 0.0;
                        if (p.radial == Radial::bounded) {
                            std::tie(a, b) = p.bounds(ray.base, ray.dir);
                            if (!(b > a)) continue;
                        }
                        const double c = u[d - 1];
                        double sr = c;
                        double ds = 1.0;
                        if (p.radial == Radial::bounded) {
                            sr = a + c * (b - a);
                            ds = b - a;
                        } else if (p.radial == Radial::logarithmic) {
                            sr = p.log_r0 * std::exp2(-c);
                            ds = sr * std::numbers::ln2;
                        }
                        const Vec x = ray.base + sr * ray.dir;
                        if (p.indicator && !p.indicator(x)) continue;
                        double jac = ds;
                        for (int k = 0; k < power; ++k) jac *= sr;
                        const double v = f(x);
                        ++ev;
                        if (!std::isfinite(v)) throw Error(ErrorCode::on_null_set, "integrand is not finite");
                        fx[m] = v * jac;
                    }
                    sv += 0.5 * (fx[0] + fx[1]) * stratum_volume;
                    const double diff = (fx[0] - fx[1]) * stratum_volume;
                    sq += 0.25 * diff * diff;
                }
                chunk_val[ci] = sv;
                chunk_var[ci] = sq;
                chunk_evals[ci] = ev;
            });
            value += pairwise_sum(chunk_val);
            var += pairwise_sum(chunk_var);
            for (auto e : chunk_evals) used += e;
        }
        evals += used;
        best = {value, 3.0 * std::sqrt(var), evals, false};
        if (best.error <= opt.tol) {
            best.converged = true;
            return best;
        }
        if (evals + 8 * 2 * strata_target > opt.max_evaluations) return best;
        strata_target *= 4;
    }
}

std::string tol_message(const Result& r, double tol) {
    std::ostringstream os;
    os.precision(6);
    os << "error estimate " << r.error << " above tol " << tol << " after " << r.evaluations
       << " evaluations (value " << r.value << ")";
    return os.str();
}

}  // namespace

std::string_view to_string(Mode mode) {
    return mode == Mode::deterministic ? "deterministic" : "monte-carlo";
}

std::optional<Mode> mode_from_string(std::string_view name) {
    if (name == "deterministic") return Mode::deterministic;
    if (name == "monte-carlo") return Mode::monte_carlo;
    return std::nullopt;
}

bool region_contains(const RegionSpec& region, const Vec& x) {
    const Domain& dom = region.base;
    return std::visit(
        [&](const auto& s) -> bool {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Ball>) {
                return distance(x, s.center) < s.radius && dom.contains(x);
            } else if constexpr (std::is_same_v<T, BallExterior>) {
                return distance(x, s.center) < s.radius && !dom.in_closure(x);
            } else if constexpr (std::is_same_v<T, InnerTube>) {
                return dom.contains(x) && s.patch.distance(x) < s.r;
            } else if constexpr (std::is_same_v<T, OuterTube>) {
                return !dom.contains(x) && s.patch.distance(x) < s.r;
            } else if constexpr (std::is_same_v<T, FullTube>) {
                return s.patch.distance(x) < s.r;
            } else if constexpr (std::is_same_v<T, WholeDomain>) {
                return dom.contains(x);
            } else {
                return dom.contains(Vec{x.x, x.y, 0.0}) && x.z > s.t0 && x.z < s.t1;
            }
        },
        region.shape);
}

Result try_integrate(const Integrand& f, const RegionSpec& region, const Options& options) {
    if (!(options.tol > 0.0)) throw Error(ErrorCode::bad_region, "tol must be positive");
    auto pieces = build_pieces(region);
    const double tail = apply_singular_point(pieces, region, f);
    Result r = options.mode == Mode::deterministic ? adaptive(pieces, f, options) : monte_carlo(pieces, f, options);
    r.error += tail;
    if (r.error > options.tol) r.converged = false;
    return r;
}

Result integrate(const Integrand& f, const RegionSpec& region, const Options& options) {
    Result r = try_integrate(f, region, options);
    if (!r.converged) throw Error(ErrorCode::tol_not_reached, tol_message(r, options.tol));
    return r;
}

// ---------------------------------------------------------------------------
// Limits
// ---------------------------------------------------------------------------

std::vector<double> RadiusSchedule::radii() const {
    if (!(r0 > 0.0) || !(ratio > 0.0 && ratio < 1.0))
        throw Error(ErrorCode::bad_region, "schedule needs r0 > 0 and ratio in (0,1)");
    if (count < 4) throw Error(ErrorCode::too_few_samples, "schedule count must be at least 4");
    std::vector<double> out(static_cast<std::size_t>(count));
    for (int k = 0; k < count; ++k) out[static_cast<std::size_t>(k)] = r0 * std::pow(ratio, k);
    return out;
}

std::string_view to_string(Classification c) {
    switch (c) {
        case Classification::convergent: return "convergent";
        case Classification::oscillatory: return "oscillatory";
        case Classification::inconclusive: return "inconclusive";
    }
    return "?";
}

LimitEstimate classify_samples(std::vector<Sample> samples, double osc_tol) {
    if (samples.size() < 4) throw Error(ErrorCode::too_few_samples, "need at least 4 samples");
    LimitEstimate est;
    est.samples = std::move(samples);
    const std::size_t n = est.samples.size();
    const std::size_t tail_n = std::min(n, std::max<std::size_t>(4, n / 2));
    const auto tail = std::span<const Sample>(est.samples).last(tail_n);

    double mr = 0.0, mv = 0.0;
    for (const auto& s : tail) {
        mr += s.r;
        mv += s.value;
    }
    mr /= static_cast<double>(tail_n);
    mv /= static_cast<double>(tail_n);
    double srr = 0.0, srv = 0.0;
    for (const auto& s : tail) {
        srr += (s.r - mr) * (s.r - mr);
        srv += (s.r - mr) * (s.value - mv);
    }
    const double slope = srr > 0.0 ? srv / srr : 0.0;
    const double intercept = mv - slope * mr;

    double res_lo = std::numeric_limits<double>::infinity();
    double res_hi = -res_lo;
    double vmin = res_lo, vmax = res_hi, scale = 1.0, max_err = 0.0;
    for (const auto& s : tail) {
        const double res = s.value - (intercept + slope * s.r);
        res_lo = std::min(res_lo, res);
        res_hi = std::max(res_hi, res);
        vmin = std::min(vmin, s.value);
        vmax = std::max(vmax, s.value);
        scale = std::max(scale, std::abs(s.value));
        max_err = std::max(max_err, s.error);
    }
    est.slope = slope;
    est.oscillation = res_hi - res_lo;
    const double threshold = osc_tol * scale;

    if (max_err > threshold) {
        est.classification = Classification::inconclusive;
    } else if (est.oscillation < threshold) {
        est.classification = Classification::convergent;
        est.limit = intercept;
    } else {
        est.classification = Classification::oscillatory;
    }
    if (est.limit) {
        const double lo = std::min(vmin, *est.limit) - max_err;
        const double hi = std::max(vmax, *est.limit) + max_err;
        est.liminf_band = {lo, hi};
        est.limsup_band = {lo, hi};
    } else {
        est.liminf_band = {vmin - max_err, vmin + max_err};
        est.limsup_band = {vmax - max_err, vmax + max_err};
    }
    return est;
}

LimitEstimate limit_estimate(const std::function<Measured(double)>& sampler, const RadiusSchedule& schedule,
                             double osc_tol) {
    if (schedule.count < 4) throw Error(ErrorCode::too_few_samples, "schedule count must be at least 4");
    std::vector<Sample> samples;
    for (double r : schedule.radii()) {
        const Measured m = sampler(r);
        samples.push_back({r, m.value, m.error});
    }
    return classify_samples(std::move(samples), osc_tol);
}

LimitEstimate limit_estimate(const std::function<double(double)>& sampler, const RadiusSchedule& schedule,
                             double osc_tol) {
    return limit_estimate(std::function<Measured(double)>([&](double r) { return Measured{sampler(r), 0.0}; }),
                          schedule, osc_tol);
}

}  // namespace tracelab::quadrature
