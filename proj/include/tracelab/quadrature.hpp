#pragma once

#include "tracelab/geometry.hpp"
#include "tracelab/vec.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string_view>
#include <variant>
#include <vector>

namespace tracelab::quadrature {

using geometry::BoundaryPatch;
using geometry::Domain;

// ---------------------------------------------------------------------------
// Regions
// ---------------------------------------------------------------------------

/// B_radius(center) intersected with the open domain.
struct Ball {
    Vec center;
    double radius;
};

/// B_radius(center) minus the closed domain.
struct BallExterior {
    Vec center;
    double radius;
};

struct InnerTube {
    BoundaryPatch patch;
    double r;
};

struct OuterTube {
    BoundaryPatch patch;
    double r;
};

/// Two-sided tube {x : dist(x, patch) < r}.
struct FullTube {
    BoundaryPatch patch;
    double r;
};

struct WholeDomain {};

/// Domain x (t0, t1); points carry the time in the last coordinate. Only the
/// box-shaped planar kinds (square, half-plane window) are supported.
struct SpaceTimeSlab {
    double t0;
    double t1;
};

using Shape = std::variant<Ball, BallExterior, InnerTube, OuterTube, FullTube, WholeDomain, SpaceTimeSlab>;

struct RegionSpec {
    Domain base;
    Shape shape;
    /// Point where the integrand may blow up like |x - p|^{-(d-1)}. It is
    /// never evaluated there.
    std::optional<Vec> singular_point;
};

// ---------------------------------------------------------------------------
// Integration
// ---------------------------------------------------------------------------

enum class Mode { deterministic, monte_carlo };

std::string_view to_string(Mode mode);
std::optional<Mode> mode_from_string(std::string_view name);

struct Options {
    Mode mode = Mode::deterministic;
    /// Absolute error target.
    double tol = 1e-8;
    std::uint64_t seed = 0;
    /// Budget in integrand evaluations.
    std::size_t max_evaluations = 40'000'000;
    /// Gauss-Legendre points per axis and cell.
    int gauss_order = 4;
    /// Initial cells along the longest physical side of each chart piece.
    int initial_cells = 8;
    /// Samples in the first Monte Carlo pass (doubled until tol is met).
    std::size_t mc_initial_samples = 1u << 14;
};

struct Result {
    double value = 0.0;
    double error = 0.0;
    std::size_t evaluations = 0;
    bool converged = true;
};

using Integrand = std::function<double(const Vec&)>;

/// Integrates over the region. Throws TolNotReached when the budget runs out
/// before the error estimate drops below tol, BadRegion for degenerate
/// regions.
Result integrate(const Integrand& f, const RegionSpec& region, const Options& options);

/// Same as integrate, but returns the best estimate with converged = false
/// instead of throwing when the budget is exhausted.
Result try_integrate(const Integrand& f, const RegionSpec& region, const Options& options);

/// Whether a point belongs to the region (used by tests and indicators).
bool region_contains(const RegionSpec& region, const Vec& x);

// ---------------------------------------------------------------------------
// Limits along radius schedules
// ---------------------------------------------------------------------------

struct RadiusSchedule {
    double r0 = 0.5;
    double ratio = 0.5;
    int count = 12;

    std::vector<double> radii() const;
};

enum class Classification { convergent, oscillatory, inconclusive };
std::string_view to_string(Classification c);

struct Sample {
    double r;
    double value;
    double error;
};

struct Band {
    double lo;
    double hi;
};

struct LimitEstimate {
    std::vector<Sample> samples;
    std::optional<double> limit;
    Band liminf_band{};
    Band limsup_band{};
    Classification classification = Classification::inconclusive;
    /// Slope of the tail fit value = L + slope * r.
    double slope = 0.0;
    /// max - min of the tail residuals against that fit.
    double oscillation = 0.0;
};

struct Measured {
    double value;
    double error;
};

inline constexpr double kDefaultOscTol = 1e-3;

/// Samples the sampler along the schedule and classifies the tail.
LimitEstimate limit_estimate(const std::function<Measured(double)>& sampler, const RadiusSchedule& schedule,
                             double osc_tol = kDefaultOscTol);
LimitEstimate limit_estimate(const std::function<double(double)>& sampler, const RadiusSchedule& schedule,
                             double osc_tol = kDefaultOscTol);

/// Classification of already computed samples (ordered by decreasing r).
LimitEstimate classify_samples(std::vector<Sample> samples, double osc_tol = kDefaultOscTol);

}  // namespace tracelab::quadrature
