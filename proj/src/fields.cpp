#include "tracelab/fields.hpp"

#include "tracelab/error.hpp"
#include "tracelab/transport.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

namespace tracelab::fields {

namespace {

constexpr double kPi = std::numbers::pi;

double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

double eval_poly(const std::vector<Monomial>& terms, const Vec& x) {
    double s = 0.0;
    for (const auto& m : terms) s += m.coeff * ipow(x.x, m.px) * ipow(x.y, m.py) * ipow(x.z, m.pz);
    return s;
}

// d/dx_axis of a polynomial component.
double eval_poly_partial(const std::vector<Monomial>& terms, const Vec& x, int axis) {
    double s = 0.0;
    for (const auto& m : terms) {
        const int p[3] = {m.px, m.py, m.pz};
        if (p[axis] == 0) continue;
        double v = m.coeff * p[axis];
        for (int a = 0; a < 3; ++a) v *= ipow(x[a], a == axis ? p[a] - 1 : p[a]);
        s += v;
    }
    return s;
}

std::string point_text(const Vec& x) {
    std::ostringstream os;
    os.precision(17);
    os << "(" << x.x << ", " << x.y << ", " << x.z << ")";
    return os.str();
}

}  // namespace

std::string_view to_string(FieldKind kind) {
    switch (kind) {
        case FieldKind::polynomial: return "polynomial";
        case FieldKind::rotation: return "rotation";
        case FieldKind::radial: return "radial";
        case FieldKind::shear: return "shear";
        case FieldKind::tiled: return "tiled";
        case FieldKind::depauw_slab: return "depauw-slab";
        case FieldKind::depauw_lift: return "depauw-lift";
    }
    return "?";
}

std::optional<FieldKind> field_kind_from_string(std::string_view name) {
    for (auto k : {FieldKind::polynomial, FieldKind::rotation, FieldKind::radial, FieldKind::shear, FieldKind::tiled,
                   FieldKind::depauw_slab, FieldKind::depauw_lift}) {
        if (to_string(k) == name) return k;
    }
    return std::nullopt;
}

std::string_view to_string(DivergenceInfo::Tag tag) {
    switch (tag) {
        case DivergenceInfo::Tag::zero: return "zero";
        case DivergenceInfo::Tag::absolutely_continuous: return "absolutely-continuous";
        case DivergenceInfo::Tag::unknown: return "unknown";
    }
    return "?";
}

std::string_view to_string(ShearProfile p) {
    switch (p) {
        case ShearProfile::constant: return "constant";
        case ShearProfile::linear: return "linear";
        case ShearProfile::sin_inverse: return "sin-inverse";
    }
    return "?";
}

std::optional<ShearProfile> shear_profile_from_string(std::string_view name) {
    for (auto p : {ShearProfile::constant, ShearProfile::linear, ShearProfile::sin_inverse}) {
        if (to_string(p) == name) return p;
    }
    return std::nullopt;
}

TileIndex tile_index(const Vec& x) {
    if (!(x.y > 0.0)) throw Error(ErrorCode::outside_domain, "tiled field needs y > 0 at " + point_text(x));
    int e = 0;
    const double mant = std::frexp(x.y, &e);
    if (mant == 0.5) throw Error(ErrorCode::on_null_set, "horizontal tile edge at " + point_text(x));
    const int j = 1 - e;
    const double sx = std::ldexp(x.x, j);
    const double fi = std::floor(sx);
    if (fi == sx) throw Error(ErrorCode::on_null_set, "vertical tile edge at " + point_text(x));
    return {static_cast<std::int64_t>(fi), j};
}

Vec base_cell_eval(const BaseCell& cell, double x, double y) {
    const double px = cell.p * kPi * x;
    const double qy = cell.q * kPi * y;
    return {cell.amp * cell.q * std::sin(px) * std::cos(qy), -cell.amp * cell.p * std::cos(px) * std::sin(qy), 0.0};
}

Field Field::polynomial(Polynomial poly) {
    if (poly.dim != 2 && poly.dim != 3) throw Error(ErrorCode::bad_config, "polynomial field dim must be 2 or 3");
    Field f(FieldKind::polynomial, "polynomial", poly.dim);
    f.poly_ = std::make_shared<const Polynomial>(std::move(poly));
    return f;
}

Field Field::identity(double scale, int dim) {
    Polynomial p;
    p.dim = dim;
    p.components[0] = {{scale, 1, 0, 0}};
    p.components[1] = {{scale, 0, 1, 0}};
    if (dim == 3) p.components[2] = {{scale, 0, 0, 1}};
    return polynomial(std::move(p));
}

Field Field::rotation() { return Field(FieldKind::rotation, "rotation", 2); }

Field Field::radial(Vec center) {
    Field f(FieldKind::radial, "radial", 2);
    f.center_ = center;
    return f;
}

Field Field::shear(ShearProfile profile, double amplitude) {
    Field f(FieldKind::shear, "shear", 2);
    f.shear_ = profile;
    f.amplitude_ = amplitude;
    return f;
}

Field Field::tiled(BaseCell cell) {
    Field f(FieldKind::tiled, "tiled", 2);
    f.cell_ = cell;
    return f;
}

Field Field::depauw_slab() { return Field(FieldKind::depauw_slab, "depauw-slab", 2); }

Field Field::depauw_lift() { return Field(FieldKind::depauw_lift, "depauw-lift", 3); }

Vec Field::eval(const Vec& x, std::optional<double> t) const {
    switch (kind_) {
        case FieldKind::polynomial: {
            Vec v{eval_poly(poly_->components[0], x), eval_poly(poly_->components[1], x), 0.0};
            if (dim_ == 3) v.z = eval_poly(poly_->components[2], x);
            return v;
        }
        case FieldKind::rotation: return {-x.y, x.x, 0.0};
        case FieldKind::radial: {
            const Vec d{x.x - center_.x, x.y - center_.y, 0.0};
            const double r2 = dot(d, d);
            if (r2 == 0.0) throw Error(ErrorCode::on_null_set, "radial field is singular at its center");
            return d / r2;
        }
        case FieldKind::shear: {
            switch (shear_) {
                case ShearProfile::constant: return {amplitude_, 0.0, 0.0};
                case ShearProfile::linear: return {amplitude_ * x.y, 0.0, 0.0};
                case ShearProfile::sin_inverse:
                    if (x.y == 0.0) throw Error(ErrorCode::on_null_set, "sin(1/y) is undefined at y = 0");
                    return {amplitude_ * std::sin(1.0 / x.y), 0.0, 0.0};
            }
            return {};
        }
        case FieldKind::tiled: {
            const TileIndex ti = tile_index(x);
            const double lx = std::ldexp(x.x, ti.j) - static_cast<double>(ti.i);
            const double ly = std::ldexp(x.y, ti.j);
            return base_cell_eval(cell_, lx, ly);
        }
        case FieldKind::depauw_slab:
            if (!t) throw Error(ErrorCode::time_out_of_range, "depauw-slab field needs a time");
            return transport::cascade_field_eval(x, *t);
        case FieldKind::depauw_lift: return transport::lift_field_eval(x);
    }
    return {};
}

DivergenceInfo Field::divergence_info() const {
    DivergenceInfo info;
    if (kind_ != FieldKind::polynomial) {
        info.tag = DivergenceInfo::Tag::zero;
        return info;
    }
    info.tag = DivergenceInfo::Tag::absolutely_continuous;
    auto poly = poly_;
    const int dim = dim_;
    info.density = [poly, dim](const Vec& x) {
        double s = 0.0;
        for (int a = 0; a < dim; ++a) s += eval_poly_partial(poly->components[static_cast<std::size_t>(a)], x, a);
        return s;
    };
    return info;
}

std::optional<Vec> Field::singular_point() const {
    if (kind_ == FieldKind::radial) return center_;
    return std::nullopt;
}

}  // namespace tracelab::fields
