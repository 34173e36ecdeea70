#pragma once

#include <cmath>

namespace tracelab {

/// Point or vector in R^2 or R^3. Planar quantities keep z = 0.
struct Vec {
    double x = 0.0;
    double y = 0.0;
    double z = 0.0;

    constexpr Vec& operator+=(const Vec& o) { x += o.x; y += o.y; z += o.z; return *this; }
    constexpr Vec& operator-=(const Vec& o) { x -= o.x; y -= o.y; z -= o.z; return *this; }
    constexpr Vec& operator*=(double s) { x *= s; y *= s; z *= s; return *this; }

    friend constexpr Vec operator+(Vec a, const Vec& b) { return a += b; }
    friend constexpr Vec operator-(Vec a, const Vec& b) { return a -= b; }
    friend constexpr Vec operator*(Vec a, double s) { return a *= s; }
    friend constexpr Vec operator*(double s, Vec a) { return a *= s; }
    friend constexpr Vec operator/(Vec a, double s) { return a *= (1.0 / s); }
    friend constexpr Vec operator-(const Vec& a) { return {-a.x, -a.y, -a.z}; }
    friend constexpr bool operator==(const Vec&, const Vec&) = default;

    constexpr double operator[](int i) const { return i == 0 ? x : (i == 1 ? y : z); }
};

constexpr double dot(const Vec& a, const Vec& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
inline double norm(const Vec& a) { return std::sqrt(dot(a, a)); }
inline double distance(const Vec& a, const Vec& b) { return norm(a - b); }

}  // namespace tracelab
