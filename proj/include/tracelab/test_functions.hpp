#pragma once

#include "tracelab/vec.hpp"

#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tracelab {

/// Closed ball containing the support of a test function.
struct SupportBall {
    Vec center;
    double radius;
};

/// Smooth test function with its exact gradient.
struct TestFunction {
    std::string name;
    std::function<double(const Vec&)> value;
    std::function<Vec(const Vec&)> gradient;
    std::optional<SupportBall> support;
};

namespace testfn {

TestFunction constant(double c);

/// exp(1 - 1/(1 - |x-c|^2/delta^2)) inside B_delta(c), 0 outside; equals 1 at c.
TestFunction bump(Vec center, double delta);

/// 1 on B_inner(c), 0 outside B_outer(c), smooth monotone in between.
TestFunction plateau(Vec center, double inner, double outer);

/// (x - s)^px (y - s)^py (z - s)^pz for a shift s.
TestFunction monomial(int px, int py, int pz = 0, Vec shift = {});

/// Pointwise product; the support is the smaller of the two balls.
TestFunction product(const TestFunction& a, const TestFunction& b);

TestFunction scaled(const TestFunction& f, double s);

/// Smooth step S on the real line: 0 for t <= 0, 1 for t >= 1.
double smooth_step(double t);
double smooth_step_derivative(double t);

}  // namespace testfn

/// Test function on space-time, value(x, t) with spatial gradient and time derivative.
struct SpaceTimeTestFunction {
    std::string name;
    std::function<double(const Vec&, double)> value;
    std::function<Vec(const Vec&, double)> gradient;
    std::function<double(const Vec&, double)> time_derivative;
};

/// Time factor with its derivative.
struct TimeProfile {
    std::string name;
    std::function<double(double)> value;
    std::function<double(double)> derivative;
};

namespace testfn {

/// Smooth bump in time supported in [a, b].
TimeProfile time_bump(double a, double b);

/// 1 for t <= a, 0 for t >= b.
TimeProfile time_cutoff(double a, double b);

SpaceTimeTestFunction separable(const TestFunction& space, const TimeProfile& time);

}  // namespace testfn

}  // namespace tracelab
