#include "tracelab/minkowski.hpp"

#include "tracelab/parallel.hpp"

#include <vector>

namespace tracelab::minkowski {

using quadrature::FullTube;
using quadrature::InnerTube;
using quadrature::Measured;
using quadrature::OuterTube;
using quadrature::RegionSpec;

std::string_view to_string(Side side) {
    switch (side) {
        case Side::inner: return "inner";
        case Side::outer: return "outer";
        case Side::both: return "both";
    }
    return "?";
}

std::optional<Side> side_from_string(std::string_view name) {
    for (auto s : {Side::inner, Side::outer, Side::both}) {
        if (to_string(s) == name) return s;
    }
    return std::nullopt;
}

Content weighted_content(const BoundaryPatch& patch, Side side, const TestFunction& phi, double r,
                         const Options& options) {
    if (patch.empty()) return {0.0, 0.0};
    RegionSpec region{patch.parent(), InnerTube{patch, r}, std::nullopt};
    if (side == Side::outer) region.shape = OuterTube{patch, r};
    if (side == Side::both) region.shape = FullTube{patch, r};
    const double scale = side == Side::both ? 2.0 * r : r;
    Options opt = options;
    opt.tol = options.tol * scale;
    const auto res = quadrature::integrate(phi.value, region, opt);
    return {res.value / scale, res.error / scale};
}

Content content(const BoundaryPatch& patch, Side side, double r, const Options& options) {
    return weighted_content(patch, side, testfn::constant(1.0), r, options);
}

LimitEstimate content_limit(const BoundaryPatch& patch, Side side, const RadiusSchedule& schedule,
                            const Options& options) {
    return quadrature::limit_estimate(std::function<Measured(double)>([&](double r) {
                                          const auto c = content(patch, side, r, options);
                                          return Measured{c.value, c.error};
                                      }),
                                      schedule);
}

WeakConvergence weak_convergence_check(const BoundaryPatch& patch, Side side, const TestFunction& phi,
                                       const RadiusSchedule& schedule, const Options& options, int boundary_nodes) {
    WeakConvergence out;
    out.estimate = quadrature::limit_estimate(std::function<Measured(double)>([&](double r) {
                                                  const auto c = weighted_content(patch, side, phi, r, options);
                                                  return Measured{c.value, c.error};
                                              }),
                                              schedule);
    const auto nodes = geometry::boundary_quadrature(patch, boundary_nodes);
    std::vector<double> terms(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) terms[i] = nodes[i].weight * phi.value(nodes[i].point);
    out.target = pairwise_sum(terms);
    return out;
}

}  // namespace tracelab::minkowski
