#pragma once

#include "tracelab/fields.hpp"
#include "tracelab/geometry.hpp"
#include "tracelab/quadrature.hpp"
#include "tracelab/test_functions.hpp"

#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace tracelab::traces {

using fields::DivergenceInfo;
using fields::Field;
using geometry::BoundaryPatch;
using geometry::Domain;
using quadrature::LimitEstimate;
using quadrature::Options;
using quadrature::RadiusSchedule;

enum class TraceClass { attained, not_attained, inconclusive };
std::string_view to_string(TraceClass c);

struct TraceSample {
    Vec point;
    /// Candidate inward trace f(x).
    double candidate = 0.0;
    /// r -> r^{-d} int_{B_r(x) cap Omega} |u . grad d - f|.
    LimitEstimate profile;
    TraceClass classification = TraceClass::inconclusive;
    /// Attainment threshold max(1e-2, 5 x largest quadrature error).
    double threshold = 0.0;

    /// Outward trace, minus the inward one.
    double outward() const { return -candidate; }
};

enum class Normalization { radius_power, ball_volume };
enum class BallSide { inside, outside };

/// Profile of r -> (1/N(r)) int_{B_r(x) cap Omega} g along the schedule, with
/// N = r^d or N = |B_r(x) cap Omega|. With BallSide::outside the ball is
/// intersected with the complement of the closure instead. Each sample is
/// integrated to options.tol in the normalized units.
LimitEstimate blowup_average(const std::function<double(const Vec&)>& g, const Domain& domain, const Vec& x,
                             const RadiusSchedule& schedule, const Options& options, Normalization norm,
                             BallSide side = BallSide::inside);

struct Pairing {
    double value = 0.0;
    double error = 0.0;
};

/// int_Omega phi d(div u) + int_Omega u . grad phi.
Pairing distributional_pairing(const Field& field, const DivergenceInfo& div, const Domain& domain,
                               const TestFunction& phi, const Options& options);

TraceSample blowup_profile(const Field& field, const Domain& domain, const Vec& x, double candidate,
                           const RadiusSchedule& schedule, const Options& options);

/// Classification rule shared by every blow-up experiment.
TraceClass classify_trace(const LimitEstimate& profile, double& threshold);

/// Inward trace candidate at x: extrapolated average of u . grad d over
/// B_r(x) cap Omega (normalized by the ball volume).
LimitEstimate signed_average(const Field& field, const Domain& domain, const Vec& x, const RadiusSchedule& schedule,
                             const Options& options);

struct BoundaryTraceReport {
    std::vector<TraceSample> samples;
    std::vector<LimitEstimate> candidates;
    double attained_fraction = 0.0;
};

BoundaryTraceReport boundary_trace_field(const Field& field, const Domain& domain, const BoundaryPatch& patch, int n,
                                         const RadiusSchedule& schedule, const Options& options);

/// r -> (1/r) int_{(patch)_r^in} f phi.
LimitEstimate tubular_pairing(const std::function<double(const Vec&)>& f, const BoundaryPatch& patch,
                              const TestFunction& phi, const RadiusSchedule& schedule, const Options& options);

struct GaussGreenResidual {
    std::string test_function;
    double pairing = 0.0;
    double boundary = 0.0;
    double residual = 0.0;
    double error = 0.0;
};

/// |pairing(phi) - int_{boundary} trace phi dH^{d-1}| for each phi; the
/// boundary integral uses boundary_nodes midpoint nodes per piece.
std::vector<GaussGreenResidual> gauss_green_residual(const Field& field, const DivergenceInfo& div,
                                                     const Domain& domain,
                                                     const std::function<double(const Vec&)>& trace_values,
                                                     const std::vector<TestFunction>& testfns, const Options& options,
                                                     int boundary_nodes = 1 << 14);

enum class FluxSign { positive, negative };

/// r -> (1/r) int_{(patch)_r^in} (u . grad d)_{+/-}.
LimitEstimate signed_flux(const Field& field, const Domain& domain, const BoundaryPatch& patch, FluxSign sign,
                          const RadiusSchedule& schedule, const Options& options);

struct GluingResult {
    std::string test_function;
    double measured = 0.0;
    double predicted = 0.0;
    double boundary_mass = 0.0;
    double measured_density = 0.0;
    double predicted_density = 0.0;
    double error = 0.0;
};

/// Outward normal trace at a boundary point from the inside (exterior =
/// false) or from the complement of the closure.
double lebesgue_normal_trace(const Field& field, const Domain& domain, const Vec& p, const RadiusSchedule& schedule,
                             const Options& options, bool exterior = false);

/// Glues field_in on Omega with field_out outside, measures the singular part
/// of the divergence against each phi and compares it with the surface
/// density -(tr_in + tr_out). Test functions must have compact support.
std::vector<GluingResult> gluing_surface_divergence(const Field& field_in, const Field& field_out,
                                                    const Domain& domain, const std::vector<TestFunction>& testfns,
                                                    const RadiusSchedule& schedule, const Options& options,
                                                    int boundary_nodes = 64);

struct ChainRuleResult {
    double max_residual = 0.0;
    double mean_residual = 0.0;
    int nodes = 0;
    int excluded = 0;
};

/// Residual of tr(beta(rho) u) = beta(tr(rho u)/tr(u)) tr(u) at boundary
/// nodes of the patch; nodes with |tr u| < 1e-8 are excluded.
ChainRuleResult chain_rule_check(const Field& field, const std::function<double(const Vec&)>& rho,
                                 const std::function<double(double)>& beta, const Domain& domain,
                                 const BoundaryPatch& patch, int n, const RadiusSchedule& schedule,
                                 const Options& options);

}  // namespace tracelab::traces
