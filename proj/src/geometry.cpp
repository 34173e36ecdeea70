#include "tracelab/geometry.hpp"

#include "tracelab/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

namespace tracelab::geometry {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

std::optional<RayInterval> intersect(std::optional<RayInterval> a, std::optional<RayInterval> b) {
    if (!a || !b) return std::nullopt;
    RayInterval r{std::max(a->lo, b->lo), std::min(a->hi, b->hi)};
    if (!(r.lo < r.hi)) return std::nullopt;
    return r;
}

std::optional<RayInterval> ray_box(const Vec& c, const Vec& e, const Vec& lo, const Vec& hi, int dim) {
    RayInterval r{-kInf, kInf};
    for (int i = 0; i < dim; ++i) {
        const double ci = c[i];
        const double ei = e[i];
        if (ei == 0.0) {
            if (!(ci > lo[i] && ci < hi[i])) return std::nullopt;
            continue;
        }
        double t1 = (lo[i] - ci) / ei;
        double t2 = (hi[i] - ci) / ei;
        if (t1 > t2) std::swap(t1, t2);
        r.lo = std::max(r.lo, t1);
        r.hi = std::min(r.hi, t2);
    }
    if (!(r.lo < r.hi)) return std::nullopt;
    return r;
}

std::optional<RayInterval> ray_ball(const Vec& c, const Vec& e, const Vec& center, double radius) {
    const Vec d = c - center;
    const double b = dot(d, e);
    const double q = dot(d, d) - radius * radius;
    const double disc = b * b - q;
    if (!(disc > 0.0)) return std::nullopt;
    const double root = std::sqrt(disc);
    return RayInterval{-b - root, -b + root};
}

// Open half-plane {y > level}.
std::optional<RayInterval> ray_above(const Vec& c, const Vec& e, double level) {
    if (e.y == 0.0) {
        if (c.y > level) return RayInterval{-kInf, kInf};
        return std::nullopt;
    }
    const double s = (level - c.y) / e.y;
    if (e.y > 0.0) return RayInterval{s, kInf};
    return RayInterval{-kInf, s};
}

double angle_offset(double phi, double theta0) {
    double delta = std::fmod(phi - theta0, kTwoPi);
    if (delta < 0.0) delta += kTwoPi;
    return delta;
}

Vec arc_point(const Arc& arc, double theta) {
    return arc.center + Vec{arc.radius * std::cos(theta), arc.radius * std::sin(theta), 0.0};
}

// Nearest point of a single piece; nullopt if that piece alone has several.
std::optional<Vec> nearest_on_piece(const Piece& piece, const Vec& x) {
    return std::visit(
        [&](const auto& p) -> std::optional<Vec> {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Segment>) {
                const Vec ab = p.b - p.a;
                const double len2 = dot(ab, ab);
                double t = len2 > 0.0 ? dot(x - p.a, ab) / len2 : 0.0;
                t = std::clamp(t, 0.0, 1.0);
                return p.a + t * ab;
            } else if constexpr (std::is_same_v<T, Arc>) {
                const Vec d = x - p.center;
                const double rho = std::hypot(d.x, d.y);
                const double span = p.theta1 - p.theta0;
                if (rho == 0.0) {
                    if (span == 0.0) return arc_point(p, p.theta0);
                    return std::nullopt;
                }
                const double delta = angle_offset(std::atan2(d.y, d.x), p.theta0);
                if (delta <= span) return p.center + (p.radius / rho) * Vec{d.x, d.y, 0.0};
                const Vec p0 = arc_point(p, p.theta0);
                const Vec p1 = arc_point(p, p.theta1);
                const double d0 = tracelab::distance(x, p0);
                const double d1 = tracelab::distance(x, p1);
                if (d0 < d1) return p0;
                if (d1 < d0) return p1;
                if (p0 == p1) return p0;
                return std::nullopt;
            } else {
                return Vec{std::clamp(x.x, p.x0, p.x1), std::clamp(x.y, p.y0, p.y1), 0.0};
            }
        },
        piece);
}

// Pieces making up the physical boundary of a bounded kind.
std::vector<Piece> boundary_pieces(const Domain& d) {
    const Vec a = d.anchor();
    const Vec s = d.extents();
    switch (d.kind()) {
        case DomainKind::unit_disk:
            return {Arc{a, d.radius(), 0.0, kTwoPi}};
        case DomainKind::unit_square: {
            const Vec p00 = a;
            const Vec p10 = a + Vec{s.x, 0.0};
            const Vec p11 = a + Vec{s.x, s.y};
            const Vec p01 = a + Vec{0.0, s.y};
            return {Segment{p00, p10}, Segment{p10, p11}, Segment{p11, p01}, Segment{p01, p00}};
        }
        case DomainKind::half_disk:
            return {Arc{a, d.radius(), 0.0, std::numbers::pi},
                    Segment{a - Vec{d.radius(), 0.0}, a + Vec{d.radius(), 0.0}}};
        case DomainKind::half_plane_window:
            return {Segment{a, a + Vec{s.x, 0.0}}};
        case DomainKind::half_space_window:
            return {Face{a.x, a.x + s.x, a.y, a.y + s.y}};
    }
    return {};
}

bool is_window(DomainKind k) {
    return k == DomainKind::half_plane_window || k == DomainKind::half_space_window;
}

std::string fmt_vec(const Vec& v, int dim) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << v.x << "," << v.y;
    if (dim == 3) os << "," << v.z;
    os << ")";
    return os.str();
}

}  // namespace

std::string_view to_string(DomainKind kind) {
    switch (kind) {
        case DomainKind::unit_disk: return "unit-disk";
        case DomainKind::unit_square: return "unit-square";
        case DomainKind::half_plane_window: return "half-plane-window";
        case DomainKind::half_disk: return "half-disk";
        case DomainKind::half_space_window: return "half-space-3d-window";
    }
    return "?";
}

std::optional<DomainKind> domain_kind_from_string(std::string_view name) {
    for (auto k : {DomainKind::unit_disk, DomainKind::unit_square, DomainKind::half_plane_window,
                   DomainKind::half_disk, DomainKind::half_space_window}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

Domain Domain::disk(Vec center, double radius) {
    if (!(radius > 0.0)) throw Error(ErrorCode::bad_region, "disk radius must be positive");
    return Domain(DomainKind::unit_disk, center, {radius, radius, 0.0});
}

Domain Domain::square(Vec lower_left, double width, double height) {
    if (!(width > 0.0 && height > 0.0)) throw Error(ErrorCode::bad_region, "square sides must be positive");
    return Domain(DomainKind::unit_square, lower_left, {width, height, 0.0});
}

Domain Domain::half_plane_window(double x0, double x1, double height) {
    if (!(x1 > x0 && height > 0.0)) throw Error(ErrorCode::bad_region, "empty half-plane window");
    return Domain(DomainKind::half_plane_window, {x0, 0.0, 0.0}, {x1 - x0, height, 0.0});
}

Domain Domain::half_disk(Vec center, double radius) {
    if (!(radius > 0.0)) throw Error(ErrorCode::bad_region, "half-disk radius must be positive");
    return Domain(DomainKind::half_disk, center, {radius, radius, 0.0});
}

Domain Domain::half_space_window(double x0, double x1, double y0, double y1, double height) {
    if (!(x1 > x0 && y1 > y0 && height > 0.0)) throw Error(ErrorCode::bad_region, "empty half-space window");
    return Domain(DomainKind::half_space_window, {x0, y0, 0.0}, {x1 - x0, y1 - y0, height});
}

bool Domain::contains(const Vec& x) const {
    const Vec& a = anchor_;
    switch (kind_) {
        case DomainKind::unit_disk:
            return std::hypot(x.x - a.x, x.y - a.y) < radius();
        case DomainKind::half_disk:
            return x.y > a.y && std::hypot(x.x - a.x, x.y - a.y) < radius();
        case DomainKind::unit_square:
        case DomainKind::half_plane_window:
            return x.x > a.x && x.x < a.x + size_.x && x.y > a.y && x.y < a.y + size_.y;
        case DomainKind::half_space_window:
            return x.x > a.x && x.x < a.x + size_.x && x.y > a.y && x.y < a.y + size_.y && x.z > 0.0 &&
                   x.z < size_.z;
    }
    return false;
}

bool Domain::in_closure(const Vec& x) const {
    const Vec& a = anchor_;
    switch (kind_) {
        case DomainKind::unit_disk:
            return std::hypot(x.x - a.x, x.y - a.y) <= radius();
        case DomainKind::half_disk:
            return x.y >= a.y && std::hypot(x.x - a.x, x.y - a.y) <= radius();
        case DomainKind::unit_square:
        case DomainKind::half_plane_window:
            return x.x >= a.x && x.x <= a.x + size_.x && x.y >= a.y && x.y <= a.y + size_.y;
        case DomainKind::half_space_window:
            return x.x >= a.x && x.x <= a.x + size_.x && x.y >= a.y && x.y <= a.y + size_.y && x.z >= 0.0 &&
                   x.z <= size_.z;
    }
    return false;
}

Box Domain::bounding_box() const {
    const Vec& a = anchor_;
    switch (kind_) {
        case DomainKind::unit_disk:
            return {a - Vec{radius(), radius()}, a + Vec{radius(), radius()}};
        case DomainKind::half_disk:
            return {a - Vec{radius(), 0.0}, a + Vec{radius(), radius()}};
        default:
            return {a, a + size_};
    }
}

double Domain::diameter() const {
    const Box b = bounding_box();
    return norm(b.hi - b.lo);
}

double Domain::volume() const {
    switch (kind_) {
        case DomainKind::unit_disk: return std::numbers::pi * radius() * radius();
        case DomainKind::half_disk: return 0.5 * std::numbers::pi * radius() * radius();
        case DomainKind::half_space_window: return size_.x * size_.y * size_.z;
        default: return size_.x * size_.y;
    }
}

std::optional<RayInterval> Domain::ray_interval(const Vec& c, const Vec& e) const {
    switch (kind_) {
        case DomainKind::unit_disk:
            return ray_ball(c, e, anchor_, radius());
        case DomainKind::half_disk:
            return intersect(ray_ball(c, e, anchor_, radius()), ray_above(c, e, anchor_.y));
        case DomainKind::unit_square:
        case DomainKind::half_plane_window:
            return ray_box(c, e, anchor_, anchor_ + size_, 2);
        case DomainKind::half_space_window:
            return ray_box(c, e, anchor_, anchor_ + size_, 3);
    }
    return std::nullopt;
}

Vec Domain::outward_normal(const Vec& p) const {
    switch (kind_) {
        case DomainKind::half_plane_window: return {0.0, -1.0, 0.0};
        case DomainKind::half_space_window: return {0.0, 0.0, -1.0};
        case DomainKind::unit_disk: {
            const Vec d = p - anchor_;
            return d / std::hypot(d.x, d.y);
        }
        default: break;
    }
    const auto pieces = boundary_pieces(*this);
    std::size_t best = 0;
    double best_d = kInf;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const double d = distance_to_piece(pieces[i], p);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    if (const auto* arc = std::get_if<Arc>(&pieces[best])) {
        const Vec d = p - arc->center;
        return d / std::hypot(d.x, d.y);
    }
    const auto& seg = std::get<Segment>(pieces[best]);
    const Vec t = (seg.b - seg.a) / norm(seg.b - seg.a);
    // Boundary segments are listed counterclockwise, so the outward normal is
    // the tangent rotated clockwise.
    return {t.y, -t.x, 0.0};
}

BoundaryPatch Domain::boundary() const { return BoundaryPatch(*this, boundary_pieces(*this), true); }

std::string Domain::describe() const {
    std::ostringstream os;
    os.precision(17);
    os << to_string(kind_);
    switch (kind_) {
        case DomainKind::unit_disk:
        case DomainKind::half_disk:
            os << "(center=" << fmt_vec(anchor_, 2) << ",radius=" << radius() << ")";
            break;
        case DomainKind::unit_square:
            os << "(origin=" << fmt_vec(anchor_, 2) << ",sides=" << fmt_vec(size_, 2) << ")";
            break;
        case DomainKind::half_plane_window:
            os << "(x=[" << anchor_.x << "," << anchor_.x + size_.x << "],height=" << size_.y << ")";
            break;
        case DomainKind::half_space_window:
            os << "(origin=" << fmt_vec(anchor_, 3) << ",extents=" << fmt_vec(size_, 3) << ")";
            break;
    }
    return os.str();
}

double piece_measure(const Piece& piece) {
    return std::visit(
        [](const auto& p) -> double {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Segment>) {
                return norm(p.b - p.a);
            } else if constexpr (std::is_same_v<T, Arc>) {
                return p.radius * (p.theta1 - p.theta0);
            } else {
                return (p.x1 - p.x0) * (p.y1 - p.y0);
            }
        },
        piece);
}

double distance_to_piece(const Piece& piece, const Vec& x) {
    if (const auto* arc = std::get_if<Arc>(&piece)) {
        const Vec d = x - arc->center;
        const double rho = std::hypot(d.x, d.y);
        if (rho == 0.0) return arc->radius;
        const double delta = angle_offset(std::atan2(d.y, d.x), arc->theta0);
        if (delta <= arc->theta1 - arc->theta0) return std::abs(arc->radius - rho);
        return std::min(tracelab::distance(x, arc_point(*arc, arc->theta0)),
                        tracelab::distance(x, arc_point(*arc, arc->theta1)));
    }
    return tracelab::distance(x, *nearest_on_piece(piece, x));
}

Vec piece_point(const Piece& piece, double u, double v) {
    return std::visit(
        [&](const auto& p) -> Vec {
            using T = std::decay_t<decltype(p)>;
            if constexpr (std::is_same_v<T, Segment>) {
                return p.a + u * (p.b - p.a);
            } else if constexpr (std::is_same_v<T, Arc>) {
                return arc_point(p, p.theta0 + u * (p.theta1 - p.theta0));
            } else {
                return Vec{p.x0 + u * (p.x1 - p.x0), p.y0 + v * (p.y1 - p.y0), 0.0};
            }
        },
        piece);
}

namespace {

bool pieces_overlap(const Piece& a, const Piece& b) {
    constexpr double eps = 1e-12;
    if (const auto* sa = std::get_if<Segment>(&a)) {
        const auto* sb = std::get_if<Segment>(&b);
        if (!sb) return false;
        const Vec da = sa->b - sa->a;
        const double la = norm(da);
        const Vec t = da / la;
        auto off_line = [&](const Vec& p) {
            const Vec q = p - sa->a;
            return std::abs(q.x * t.y - q.y * t.x) > eps;
        };
        if (off_line(sb->a) || off_line(sb->b)) return false;
        double u0 = dot(sb->a - sa->a, t);
        double u1 = dot(sb->b - sa->a, t);
        if (u0 > u1) std::swap(u0, u1);
        return std::min(la, u1) - std::max(0.0, u0) > eps;
    }
    if (const auto* aa = std::get_if<Arc>(&a)) {
        const auto* ab = std::get_if<Arc>(&b);
        if (!ab) return false;
        if (!(aa->center == ab->center) || aa->radius != ab->radius) return false;
        // Compare on the circle: shift b's start into a's frame.
        const double start = angle_offset(ab->theta0, aa->theta0);
        const double span_a = aa->theta1 - aa->theta0;
        const double span_b = ab->theta1 - ab->theta0;
        auto overlap_len = [](double a0, double a1, double b0, double b1) {
            return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
        };
        const double o = overlap_len(0.0, span_a, start, start + span_b) +
                         overlap_len(0.0, span_a, start - kTwoPi, start - kTwoPi + span_b);
        return o > eps;
    }
    const auto& fa = std::get<Face>(a);
    const auto* fb = std::get_if<Face>(&b);
    if (!fb) return false;
    const double wx = std::min(fa.x1, fb->x1) - std::max(fa.x0, fb->x0);
    const double wy = std::min(fa.y1, fb->y1) - std::max(fa.y0, fb->y0);
    return wx > eps && wy > eps;
}

}  // namespace

BoundaryPatch::BoundaryPatch(Domain parent, std::vector<Piece> pieces, bool closed)
    : parent_(std::move(parent)), pieces_(std::move(pieces)), closed_(closed) {
    const double tol = 1e-9 * (1.0 + parent_.diameter());
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        if (const auto* arc = std::get_if<Arc>(&pieces_[i])) {
            if (!(arc->theta1 > arc->theta0) || arc->theta1 - arc->theta0 > kTwoPi + 1e-12)
                throw Error(ErrorCode::bad_region, "arc angles must satisfy theta0 < theta1 <= theta0 + 2pi");
        }
        for (double u : {0.0, 0.5, 1.0}) {
            if (geometry::distance(parent_, piece_point(pieces_[i], u, u)) > tol)
                throw Error(ErrorCode::bad_region, "patch piece does not lie on the physical boundary");
        }
        for (std::size_t j = 0; j < i; ++j) {
            if (pieces_overlap(pieces_[i], pieces_[j]))
                throw Error(ErrorCode::bad_region, "patch pieces overlap");
        }
    }
}

double BoundaryPatch::distance(const Vec& x) const {
    double d = kInf;
    for (const auto& p : pieces_) d = std::min(d, distance_to_piece(p, x));
    return d;
}

std::size_t BoundaryPatch::nearest_piece(const Vec& x) const {
    std::size_t best = 0;
    double best_d = kInf;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const double d = distance_to_piece(pieces_[i], x);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

BoundaryPatch full_circle(const Domain& disk) {
    return BoundaryPatch(disk, {Arc{disk.anchor(), disk.radius(), 0.0, kTwoPi}}, true);
}

BoundaryPatch circle_arc(const Domain& disk, double theta0, double theta1) {
    return BoundaryPatch(disk, {Arc{disk.anchor(), disk.radius(), theta0, theta1}}, true);
}

BoundaryPatch flat_segment(const Domain& domain, double x0, double x1) {
    const double level = domain.anchor().y;
    return BoundaryPatch(domain, {Segment{{x0, level, 0.0}, {x1, level, 0.0}}}, true);
}

BoundaryPatch square_edge(const Domain& square, int edge) {
    auto pieces = boundary_pieces(square);
    if (square.kind() != DomainKind::unit_square || edge < 0 || edge > 3)
        throw Error(ErrorCode::bad_region, "square_edge needs a unit-square domain and edge in 0..3");
    return BoundaryPatch(square, {pieces[static_cast<std::size_t>(edge)]}, true);
}

BoundaryPatch bottom_face(const Domain& window, double x0, double x1, double y0, double y1) {
    return BoundaryPatch(window, {Face{x0, x1, y0, y1}}, true);
}

double distance(const Domain& domain, const Vec& x) {
    switch (domain.kind()) {
        case DomainKind::half_plane_window: return std::abs(x.y);
        case DomainKind::half_space_window: return std::abs(x.z);
        case DomainKind::unit_disk: return std::abs(domain.radius() - std::hypot(x.x - domain.anchor().x, x.y - domain.anchor().y));
        default: break;
    }
    double d = kInf;
    for (const auto& p : boundary_pieces(domain)) d = std::min(d, distance_to_piece(p, x));
    return d;
}

std::optional<Vec> project_boundary(const Domain& domain, const Vec& x) {
    switch (domain.kind()) {
        case DomainKind::half_plane_window: return Vec{x.x, 0.0, 0.0};
        case DomainKind::half_space_window: return Vec{x.x, x.y, 0.0};
        default: break;
    }
    const auto pieces = boundary_pieces(domain);
    double best = kInf;
    for (const auto& p : pieces) best = std::min(best, distance_to_piece(p, x));
    std::optional<Vec> found;
    for (const auto& p : pieces) {
        if (distance_to_piece(p, x) != best) continue;
        const auto q = nearest_on_piece(p, x);
        if (!q) return std::nullopt;
        if (found && !(*found == *q)) return std::nullopt;
        found = q;
    }
    return found;
}

std::optional<Vec> grad_distance(const Domain& domain, const Vec& x) {
    const auto p = project_boundary(domain, x);
    if (!p) return std::nullopt;
    const Vec d = x - *p;
    const double len = norm(d);
    if (len == 0.0) return std::nullopt;
    return d / len;
}

Vec grad_distance_ae(const Domain& domain, const Vec& x) {
    switch (domain.kind()) {
        case DomainKind::half_plane_window: return {0.0, x.y >= 0.0 ? 1.0 : -1.0, 0.0};
        case DomainKind::half_space_window: return {0.0, 0.0, x.z >= 0.0 ? 1.0 : -1.0};
        case DomainKind::unit_disk: {
            const Vec d = x - domain.anchor();
            const double rho = std::hypot(d.x, d.y);
            if (rho == 0.0) return {-1.0, 0.0, 0.0};
            const double s = rho < domain.radius() ? -1.0 : 1.0;
            return (s / rho) * Vec{d.x, d.y, 0.0};
        }
        default: break;
    }
    const auto pieces = boundary_pieces(domain);
    std::size_t best = 0;
    double best_d = kInf;
    for (std::size_t i = 0; i < pieces.size(); ++i) {
        const double d = distance_to_piece(pieces[i], x);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    auto q = nearest_on_piece(pieces[best], x);
    if (!q) {
        const auto& arc = std::get<Arc>(pieces[best]);
        q = arc_point(arc, arc.theta0);
    }
    const Vec d = x - *q;
    const double len = norm(d);
    if (len == 0.0) return -domain.outward_normal(x);
    return d / len;
}

std::string_view to_string(RegionTag tag) {
    switch (tag) {
        case RegionTag::tube_in: return "tube-in";
        case RegionTag::tube_out: return "tube-out";
        case RegionTag::deep_interior: return "deep-interior";
        case RegionTag::deep_exterior: return "deep-exterior";
    }
    return "?";
}

RegionTag region_classify(const Domain& domain, const BoundaryPatch& patch, const Vec& x, double r) {
    const bool inside = domain.contains(x);
    const bool near = !patch.empty() && patch.distance(x) < r;
    if (inside) return near ? RegionTag::tube_in : RegionTag::deep_interior;
    return near ? RegionTag::tube_out : RegionTag::deep_exterior;
}

double patch_measure(const BoundaryPatch& patch) {
    double m = 0.0;
    for (const auto& p : patch.pieces()) m += piece_measure(p);
    return m;
}

std::vector<BoundaryNode> boundary_quadrature(const BoundaryPatch& patch, int n) {
    if (n < 1) throw Error(ErrorCode::bad_region, "boundary quadrature needs n >= 1");
    std::vector<BoundaryNode> nodes;
    const auto& parent = patch.parent();
    for (const auto& piece : patch.pieces()) {
        const double measure = piece_measure(piece);
        if (std::holds_alternative<Face>(piece)) {
            const double w = measure / (static_cast<double>(n) * n);
            for (int i = 0; i < n; ++i) {
                for (int j = 0; j < n; ++j) {
                    const Vec p = piece_point(piece, (i + 0.5) / n, (j + 0.5) / n);
                    nodes.push_back({p, w, parent.outward_normal(p)});
                }
            }
        } else {
            const double w = measure / n;
            for (int i = 0; i < n; ++i) {
                const Vec p = piece_point(piece, (i + 0.5) / n);
                nodes.push_back({p, w, parent.outward_normal(p)});
            }
        }
    }
    return nodes;
}

}  // namespace tracelab::geometry
