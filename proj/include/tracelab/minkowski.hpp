#pragma once

#include "tracelab/geometry.hpp"
#include "tracelab/quadrature.hpp"
#include "tracelab/test_functions.hpp"

#include <optional>
#include <string_view>

namespace tracelab::minkowski {

using geometry::BoundaryPatch;
using quadrature::LimitEstimate;
using quadrature::Options;
using quadrature::RadiusSchedule;

enum class Side { inner, outer, both };
std::string_view to_string(Side side);
std::optional<Side> side_from_string(std::string_view name);

struct Content {
    double value = 0.0;
    double error = 0.0;
};

/// |tube|/r for one-sided tubes, |tube|/(2r) for the two-sided one.
Content content(const BoundaryPatch& patch, Side side, double r, const Options& options);

/// (1/r) int_tube phi (or 1/(2r) for both sides).
Content weighted_content(const BoundaryPatch& patch, Side side, const TestFunction& phi, double r,
                         const Options& options);

LimitEstimate content_limit(const BoundaryPatch& patch, Side side, const RadiusSchedule& schedule,
                            const Options& options);

struct WeakConvergence {
    LimitEstimate estimate;
    /// int_patch phi dH^{d-1} by boundary quadrature.
    double target = 0.0;
};

WeakConvergence weak_convergence_check(const BoundaryPatch& patch, Side side, const TestFunction& phi,
                                       const RadiusSchedule& schedule, const Options& options,
                                       int boundary_nodes = 1 << 14);

}  // namespace tracelab::minkowski
