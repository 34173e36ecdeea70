#include "tracelab/test_functions.hpp"

#include <cmath>
#include <sstream>

namespace tracelab::testfn {

namespace {

double ipow(double x, int p) {
    double r = 1.0;
    for (int i = 0; i < p; ++i) r *= x;
    return r;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(6);
    os << v;
    return os.str();
}

std::string fmt(const Vec& v) { return "(" + fmt(v.x) + "," + fmt(v.y) + "," + fmt(v.z) + ")"; }

double g(double t) { return t > 0.0 ? std::exp(-1.0 / t) : 0.0; }
double dg(double t) { return t > 0.0 ? std::exp(-1.0 / t) / (t * t) : 0.0; }

}  // namespace

double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    return g(t) / (g(t) + g(1.0 - t));
}

double smooth_step_derivative(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double a = g(t);
    const double b = g(1.0 - t);
    return (dg(t) * b + a * dg(1.0 - t)) / ((a + b) * (a + b));
}

TestFunction constant(double c) {
    return {"constant " + fmt(c), [c](const Vec&) { return c; }, [](const Vec&) { return Vec{}; }, std::nullopt};
}

TestFunction bump(Vec center, double delta) {
    TestFunction f;
    f.name = "bump " + fmt(center) + " radius " + fmt(delta);
    const double d2 = delta * delta;
    f.value = [center, d2](const Vec& x) {
        const Vec y = x - center;
        const double q = dot(y, y) / d2;
        if (q >= 1.0) return 0.0;
        return std::exp(1.0 - 1.0 / (1.0 - q));
    };
    f.gradient = [center, d2](const Vec& x) {
        const Vec y = x - center;
        const double q = dot(y, y) / d2;
        if (q >= 1.0) return Vec{};
        const double e = std::exp(1.0 - 1.0 / (1.0 - q));
        const double dq = -e / ((1.0 - q) * (1.0 - q));
        return (2.0 * dq / d2) * y;
    };
    f.support = SupportBall{center, delta};
    return f;
}

TestFunction plateau(Vec center, double inner, double outer) {
    TestFunction f;
    f.name = "plateau " + fmt(center) + " " + fmt(inner) + ".." + fmt(outer);
    const double w = outer - inner;
    f.value = [center, outer, w](const Vec& x) { return smooth_step((outer - norm(x - center)) / w); };
    f.gradient = [center, outer, w](const Vec& x) {
        const Vec y = x - center;
        const double rho = norm(y);
        if (rho == 0.0) return Vec{};
        const double ds = smooth_step_derivative((outer - rho) / w);
        return (-ds / (w * rho)) * y;
    };
    f.support = SupportBall{center, outer};
    return f;
}

TestFunction monomial(int px, int py, int pz, Vec shift) {
    TestFunction f;
    f.name = "monomial " + std::to_string(px) + "," + std::to_string(py) + "," + std::to_string(pz);
    f.value = [=](const Vec& x) {
        const Vec y = x - shift;
        return ipow(y.x, px) * ipow(y.y, py) * ipow(y.z, pz);
    };
    f.gradient = [=](const Vec& x) {
        const Vec y = x - shift;
        const double a = ipow(y.x, px), b = ipow(y.y, py), c = ipow(y.z, pz);
        return Vec{px > 0 ? px * ipow(y.x, px - 1) * b * c : 0.0, py > 0 ? py * a * ipow(y.y, py - 1) * c : 0.0,
                   pz > 0 ? pz * a * b * ipow(y.z, pz - 1) : 0.0};
    };
    return f;
}

TestFunction product(const TestFunction& a, const TestFunction& b) {
    TestFunction f;
    f.name = a.name + " * " + b.name;
    f.value = [a, b](const Vec& x) { return a.value(x) * b.value(x); };
    f.gradient = [a, b](const Vec& x) { return b.value(x) * a.gradient(x) + a.value(x) * b.gradient(x); };
    if (a.support && b.support) f.support = a.support->radius <= b.support->radius ? a.support : b.support;
    else f.support = a.support ? a.support : b.support;
    return f;
}

TestFunction scaled(const TestFunction& f, double s) {
    TestFunction out = f;
    out.name = fmt(s) + " * " + f.name;
    out.value = [f, s](const Vec& x) { return s * f.value(x); };
    out.gradient = [f, s](const Vec& x) { return s * f.gradient(x); };
    return out;
}

TimeProfile time_bump(double a, double b) {
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    TimeProfile p;
    p.name = "time bump " + fmt(a) + ".." + fmt(b);
    p.value = [c, h](double t) {
        const double q = (t - c) * (t - c) / (h * h);
        return q >= 1.0 ? 0.0 : std::exp(1.0 - 1.0 / (1.0 - q));
    };
    p.derivative = [c, h](double t) {
        const double q = (t - c) * (t - c) / (h * h);
        if (q >= 1.0) return 0.0;
        const double e = std::exp(1.0 - 1.0 / (1.0 - q));
        return -e / ((1.0 - q) * (1.0 - q)) * 2.0 * (t - c) / (h * h);
    };
    return p;
}

TimeProfile time_cutoff(double a, double b) {
    TimeProfile p;
    p.name = "time cutoff " + fmt(a) + ".." + fmt(b);
    const double w = b - a;
    p.value = [b, w](double t) { return smooth_step((b - t) / w); };
    p.derivative = [b, w](double t) { return -smooth_step_derivative((b - t) / w) / w; };
    return p;
}

SpaceTimeTestFunction separable(const TestFunction& space, const TimeProfile& time) {
    SpaceTimeTestFunction f;
    f.name = space.name + " x " + time.name;
    f.value = [space, time](const Vec& x, double t) { return space.value(x) * time.value(t); };
    f.gradient = [space, time](const Vec& x, double t) { return time.value(t) * space.gradient(x); };
    f.time_derivative = [space, time](const Vec& x, double t) { return space.value(x) * time.derivative(t); };
    return f;
}

}  // namespace tracelab::testfn
