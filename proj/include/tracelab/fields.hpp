#pragma once

#include "tracelab/vec.hpp"

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tracelab::fields {

enum class FieldKind { polynomial, rotation, radial, shear, tiled, depauw_slab, depauw_lift };

std::string_view to_string(FieldKind kind);
std::optional<FieldKind> field_kind_from_string(std::string_view name);

struct DivergenceInfo {
    enum class Tag { zero, absolutely_continuous, unknown };
    Tag tag = Tag::unknown;
    /// Set for absolutely-continuous divergences.
    std::function<double(const Vec&)> density;
};

std::string_view to_string(DivergenceInfo::Tag tag);

/// coeff * x^px y^py z^pz
struct Monomial {
    double coeff;
    int px;
    int py;
    int pz = 0;
};

/// Component-wise polynomial; components beyond dim are ignored.
struct Polynomial {
    int dim = 2;
    std::array<std::vector<Monomial>, 3> components;
};

enum class ShearProfile { constant, linear, sin_inverse };
std::string_view to_string(ShearProfile p);
std::optional<ShearProfile> shear_profile_from_string(std::string_view name);

/// Divergence-free base cell field on Q = [0,1] x [1,2] tangent to its
/// boundary, from the stream function amp * sin(p pi x) sin(q pi y) / pi:
/// v = amp * (q sin(p pi x) cos(q pi y), -p cos(p pi x) sin(q pi y)).
/// The default (p, q, amp) = (2, 2, 1/2) is the standard example
/// v = (sin 2 pi x cos 2 pi y, -sin 2 pi y cos 2 pi x).
struct BaseCell {
    int p = 2;
    int q = 2;
    double amp = 0.5;
};

struct TileIndex {
    std::int64_t i;
    int j;
};

/// Tile Q_{i,j} = 2^{-j}(Q + i e1) containing x. Throws OnNullSet on tile
/// edges and OutsideDomain for y <= 0.
TileIndex tile_index(const Vec& x);

/// Base cell field evaluated at local coordinates.
Vec base_cell_eval(const BaseCell& cell, double x, double y);

/// Immutable, shareable field description.
class Field {
public:
    static Field polynomial(Polynomial poly);
    /// u = scale * x, a convenience polynomial.
    static Field identity(double scale = 1.0, int dim = 2);
    static Field rotation();
    /// x |x|^{-2} about center (planar).
    static Field radial(Vec center = {});
    static Field shear(ShearProfile profile, double amplitude = 1.0);
    static Field tiled(BaseCell cell = {});
    static Field depauw_slab();
    static Field depauw_lift();

    FieldKind kind() const { return kind_; }
    const std::string& name() const { return name_; }
    int dim() const { return dim_; }
    bool time_dependent() const { return kind_ == FieldKind::depauw_slab; }

    /// Throws OutsideDomain / OnNullSet, or TimeOutOfRange when a time is
    /// required but missing.
    Vec eval(const Vec& x, std::optional<double> t = std::nullopt) const;

    DivergenceInfo divergence_info() const;

    /// Point where |u| is unbounded, if any.
    std::optional<Vec> singular_point() const;

private:
    Field(FieldKind kind, std::string name, int dim) : kind_(kind), name_(std::move(name)), dim_(dim) {}

    FieldKind kind_;
    std::string name_;
    int dim_;
    std::shared_ptr<const Polynomial> poly_;
    Vec center_;
    ShearProfile shear_ = ShearProfile::constant;
    double amplitude_ = 1.0;
    BaseCell cell_;
};

}  // namespace tracelab::fields
