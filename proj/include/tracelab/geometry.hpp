#pragma once

#include "tracelab/vec.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

namespace tracelab::geometry {

enum class DomainKind {
    unit_disk,
    unit_square,
    half_plane_window,
    half_disk,
    half_space_window,
};

std::string_view to_string(DomainKind kind);
std::optional<DomainKind> domain_kind_from_string(std::string_view name);

struct Box {
    Vec lo;
    Vec hi;
};

/// Parameter interval (lo, hi) of the ray c + s*e that lies in an open set.
struct RayInterval {
    double lo;
    double hi;
};

class BoundaryPatch;

/// One of the analytic domains. Windows stand in for the unbounded half-plane
/// and half-space: only the flat side {y = 0} (resp. {z = 0}) is physical
/// boundary, the remaining sides merely bound integration.
class Domain {
public:
    static Domain disk(Vec center = {}, double radius = 1.0);
    static Domain square(Vec lower_left = {}, double width = 1.0, double height = 1.0);
    static Domain half_plane_window(double x0 = -1.0, double x1 = 2.0, double height = 1.0);
    static Domain half_disk(Vec center = {}, double radius = 1.0);
    static Domain half_space_window(double x0 = -1.0, double x1 = 1.0, double y0 = -1.0,
                                    double y1 = 1.0, double height = 1.0);

    DomainKind kind() const { return kind_; }
    int dim() const { return kind_ == DomainKind::half_space_window ? 3 : 2; }

    /// Center (disk kinds), lower-left corner (square, windows).
    Vec anchor() const { return anchor_; }
    double radius() const { return size_.x; }
    /// Side lengths / window extents.
    Vec extents() const { return size_; }

    bool contains(const Vec& x) const;
    bool in_closure(const Vec& x) const;
    bool on_boundary(const Vec& x) const { return in_closure(x) && !contains(x); }

    Box bounding_box() const;
    double diameter() const;
    double volume() const;

    /// Portion of the ray c + s*e (e unit) inside the open domain; empty when
    /// the ray misses it. The domain is convex, so this is one interval.
    std::optional<RayInterval> ray_interval(const Vec& c, const Vec& e) const;

    /// Outward unit normal at a point of the physical boundary.
    Vec outward_normal(const Vec& p) const;

    /// The physical boundary as a closed patch.
    BoundaryPatch boundary() const;

    std::string describe() const;

private:
    Domain(DomainKind kind, Vec anchor, Vec size) : kind_(kind), anchor_(anchor), size_(size) {}

    DomainKind kind_;
    Vec anchor_;
    Vec size_;
};

/// Straight piece of a planar boundary.
struct Segment {
    Vec a;
    Vec b;
};

/// Counterclockwise arc of the circle |x - center| = radius, angles in radians,
/// theta0 < theta1 <= theta0 + 2*pi.
struct Arc {
    Vec center;
    double radius;
    double theta0;
    double theta1;
};

/// Axis-aligned rectangle in the plane z = 0 (3D domains).
struct Face {
    double x0;
    double x1;
    double y0;
    double y1;
};

using Piece = std::variant<Segment, Arc, Face>;

double piece_measure(const Piece& piece);
double distance_to_piece(const Piece& piece, const Vec& x);
/// Point of the piece at parameter fraction u in [0,1] (faces: u, v).
Vec piece_point(const Piece& piece, double u, double v = 0.0);

class BoundaryPatch {
public:
    /// Throws BadRegion when pieces overlap.
    BoundaryPatch(Domain parent, std::vector<Piece> pieces, bool closed);

    const Domain& parent() const { return parent_; }
    const std::vector<Piece>& pieces() const { return pieces_; }
    bool closed() const { return closed_; }
    bool empty() const { return pieces_.empty(); }

    double distance(const Vec& x) const;
    /// Index of the nearest piece (lowest index on ties).
    std::size_t nearest_piece(const Vec& x) const;

private:
    Domain parent_;
    std::vector<Piece> pieces_;
    bool closed_;
};

// Convenience constructors for the patches the experiments use.
BoundaryPatch full_circle(const Domain& disk);
BoundaryPatch circle_arc(const Domain& disk, double theta0, double theta1);
BoundaryPatch flat_segment(const Domain& domain, double x0, double x1);
BoundaryPatch square_edge(const Domain& square, int edge);  // 0 bottom, 1 right, 2 top, 3 left
BoundaryPatch bottom_face(const Domain& window, double x0, double x1, double y0, double y1);

/// Distance to the physical boundary of the domain.
double distance(const Domain& domain, const Vec& x);

/// Nearest boundary point, or nullopt on the ridge set (non-unique projection).
std::optional<Vec> project_boundary(const Domain& domain, const Vec& x);

/// Gradient of the distance function, (x - p)/|x - p|. nullopt on the ridge
/// set and on the boundary itself.
std::optional<Vec> grad_distance(const Domain& domain, const Vec& x);

/// Almost-everywhere version used inside integrands: on the ridge set it
/// returns the gradient toward the first minimizing boundary piece.
Vec grad_distance_ae(const Domain& domain, const Vec& x);

enum class RegionTag { tube_in, tube_out, deep_interior, deep_exterior };
std::string_view to_string(RegionTag tag);

/// Outer tube points are those outside the open domain; this differs from
/// "outside the closure" only on the null set of the boundary itself.
RegionTag region_classify(const Domain& domain, const BoundaryPatch& patch, const Vec& x, double r);

double patch_measure(const BoundaryPatch& patch);

struct BoundaryNode {
    Vec point;
    double weight;
    Vec normal;  // outward normal of the parent domain
};

/// Composite midpoint rule: n nodes per curve piece, n x n per face.
std::vector<BoundaryNode> boundary_quadrature(const BoundaryPatch& patch, int n);

}  // namespace tracelab::geometry
