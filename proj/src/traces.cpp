#include "tracelab/traces.hpp"

#include "tracelab/error.hpp"
#include "tracelab/parallel.hpp"

#include <algorithm>
#include <cmath>

namespace tracelab::traces {

using quadrature::Ball;
using quadrature::BallExterior;
using quadrature::InnerTube;
using quadrature::Measured;
using quadrature::RegionSpec;
using quadrature::WholeDomain;

namespace {

double extrapolated(const LimitEstimate& est) {
    if (est.limit) return *est.limit;
    return 0.5 * (est.liminf_band.lo + est.limsup_band.hi);
}

double outward_limit(const std::function<double(const Vec&)>& g, const Domain& domain, const Vec& p,
                     const RadiusSchedule& schedule, const Options& options, BallSide side) {
    return -extrapolated(blowup_average(g, domain, p, schedule, options, Normalization::ball_volume, side));
}

}  // namespace

std::string_view to_string(TraceClass c) {
    switch (c) {
        case TraceClass::attained: return "lebesgue-trace-attained";
        case TraceClass::not_attained: return "not-attained";
        case TraceClass::inconclusive: return "inconclusive";
    }
    return "?";
}

LimitEstimate blowup_average(const std::function<double(const Vec&)>& g, const Domain& domain, const Vec& x,
                             const RadiusSchedule& schedule, const Options& options, Normalization norm,
                             BallSide side) {
    const int d = domain.dim();
    return quadrature::limit_estimate(
        std::function<Measured(double)>([&](double r) {
            RegionSpec region{domain, Ball{x, r}, std::nullopt};
            if (side == BallSide::outside) region.shape = BallExterior{x, r};
            const double scale = std::pow(r, d);
            Options opt = options;
            opt.tol = options.tol * scale;
            double n = scale;
            if (norm == Normalization::ball_volume) {
                Options vol = opt;
                vol.mode = quadrature::Mode::deterministic;
                n = quadrature::integrate([](const Vec&) { return 1.0; }, region, vol).value;
                if (!(n > 0.0)) throw Error(ErrorCode::bad_region, "ball does not meet the requested side");
            }
            const auto res = quadrature::integrate(g, region, opt);
            return Measured{res.value / n, res.error / n};
        }),
        schedule);
}

Pairing distributional_pairing(const Field& field, const DivergenceInfo& div, const Domain& domain,
                               const TestFunction& phi, const Options& options) {
    if (div.tag == DivergenceInfo::Tag::unknown)
        throw Error(ErrorCode::bad_region, "pairing needs a known divergence for field " + field.name());
    RegionSpec region{domain, WholeDomain{}, std::nullopt};
    if (phi.support) region.shape = Ball{phi.support->center, phi.support->radius};
    if (const auto sp = field.singular_point()) {
        const bool near = !phi.support || distance(*sp, phi.support->center) <= phi.support->radius;
        if (domain.in_closure(*sp) && near) region.singular_point = sp;
    }
    const bool has_density = div.tag == DivergenceInfo::Tag::absolutely_continuous;
    const auto integrand = [&](const Vec& x) {
        const Vec g = phi.gradient(x);
        const double v = has_density ? phi.value(x) : 0.0;
        if (g == Vec{} && v == 0.0) return 0.0;
        double s = dot(field.eval(x), g);
        if (v != 0.0) s += v * div.density(x);
        return s;
    };
    const auto res = quadrature::integrate(integrand, region, options);
    return {res.value, res.error};
}

TraceClass classify_trace(const LimitEstimate& profile, double& threshold) {
    double err = 0.0;
    const std::size_t n = profile.samples.size();
    const std::size_t tail = std::min(n, std::max<std::size_t>(4, n / 2));
    for (std::size_t i = n - tail; i < n; ++i) err = std::max(err, profile.samples[i].error);
    threshold = std::max(1e-2, 5.0 * err);
    if (profile.classification == quadrature::Classification::convergent && profile.limit &&
        std::abs(*profile.limit) <= threshold)
        return TraceClass::attained;
    if ((profile.limit && std::abs(*profile.limit) > threshold) || profile.liminf_band.lo > threshold)
        return TraceClass::not_attained;
    return TraceClass::inconclusive;
}

TraceSample blowup_profile(const Field& field, const Domain& domain, const Vec& x, double candidate,
                           const RadiusSchedule& schedule, const Options& options) {
    if (geometry::distance(domain, x) > 1e-12 * (1.0 + domain.diameter()))
        throw Error(ErrorCode::outside_domain, "blow-up point must lie on the physical boundary");
    TraceSample s;
    s.point = x;
    s.candidate = candidate;
    const auto g = [&](const Vec& y) {
        return std::abs(dot(field.eval(y), geometry::grad_distance_ae(domain, y)) - candidate);
    };
    s.profile = blowup_average(g, domain, x, schedule, options, Normalization::radius_power);
    s.classification = classify_trace(s.profile, s.threshold);
    return s;
}

LimitEstimate signed_average(const Field& field, const Domain& domain, const Vec& x, const RadiusSchedule& schedule,
                             const Options& options) {
    const auto g = [&](const Vec& y) { return dot(field.eval(y), geometry::grad_distance_ae(domain, y)); };
    return blowup_average(g, domain, x, schedule, options, Normalization::ball_volume);
}

BoundaryTraceReport boundary_trace_field(const Field& field, const Domain& domain, const BoundaryPatch& patch, int n,
                                         const RadiusSchedule& schedule, const Options& options) {
    BoundaryTraceReport rep;
    const auto nodes = geometry::boundary_quadrature(patch, n);
    int attained = 0;
    for (const auto& node : nodes) {
        auto cand = signed_average(field, domain, node.point, schedule, options);
        auto sample = blowup_profile(field, domain, node.point, extrapolated(cand), schedule, options);
        if (sample.classification == TraceClass::attained) ++attained;
        rep.candidates.push_back(std::move(cand));
        rep.samples.push_back(std::move(sample));
    }
    rep.attained_fraction = nodes.empty() ? 0.0 : static_cast<double>(attained) / static_cast<double>(nodes.size());
    return rep;
}

LimitEstimate tubular_pairing(const std::function<double(const Vec&)>& f, const BoundaryPatch& patch,
                              const TestFunction& phi, const RadiusSchedule& schedule, const Options& options) {
    return quadrature::limit_estimate(
        std::function<Measured(double)>([&](double r) {
            Options opt = options;
            opt.tol = options.tol * r;
            const auto res = quadrature::integrate([&](const Vec& x) { return f(x) * phi.value(x); },
                                                   {patch.parent(), InnerTube{patch, r}, std::nullopt}, opt);
            return Measured{res.value / r, res.error / r};
        }),
        schedule);
}

std::vector<GaussGreenResidual> gauss_green_residual(const Field& field, const DivergenceInfo& div,
                                                     const Domain& domain,
                                                     const std::function<double(const Vec&)>& trace_values,
                                                     const std::vector<TestFunction>& testfns, const Options& options,
                                                     int boundary_nodes) {
    const auto nodes = geometry::boundary_quadrature(domain.boundary(), boundary_nodes);
    std::vector<double> traces(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) traces[i] = trace_values(nodes[i].point);
    std::vector<GaussGreenResidual> out;
    for (const auto& phi : testfns) {
        GaussGreenResidual r;
        r.test_function = phi.name;
        const auto pairing = distributional_pairing(field, div, domain, phi, options);
        r.pairing = pairing.value;
        r.error = pairing.error;
        std::vector<double> terms(nodes.size());
        for (std::size_t i = 0; i < nodes.size(); ++i) terms[i] = nodes[i].weight * traces[i] * phi.value(nodes[i].point);
        r.boundary = pairwise_sum(terms);
        r.residual = std::abs(r.pairing - r.boundary);
        out.push_back(std::move(r));
    }
    return out;
}

LimitEstimate signed_flux(const Field& field, const Domain& domain, const BoundaryPatch& patch, FluxSign sign,
                          const RadiusSchedule& schedule, const Options& options) {
    if (!patch.closed()) throw Error(ErrorCode::bad_region, "signed flux needs a closed patch");
    const double s = sign == FluxSign::positive ? 1.0 : -1.0;
    const auto f = [&](const Vec& y) {
        return std::max(0.0, s * dot(field.eval(y), geometry::grad_distance_ae(domain, y)));
    };
    return tubular_pairing(f, patch, testfn::constant(1.0), schedule, options);
}

double lebesgue_normal_trace(const Field& field, const Domain& domain, const Vec& p, const RadiusSchedule& schedule,
                             const Options& options, bool exterior) {
    const auto g = [&](const Vec& y) { return dot(field.eval(y), geometry::grad_distance_ae(domain, y)); };
    return outward_limit(g, domain, p, schedule, options, exterior ? BallSide::outside : BallSide::inside);
}

std::vector<GluingResult> gluing_surface_divergence(const Field& field_in, const Field& field_out,
                                                    const Domain& domain, const std::vector<TestFunction>& testfns,
                                                    const RadiusSchedule& schedule, const Options& options,
                                                    int boundary_nodes) {
    const auto div_in = field_in.divergence_info();
    const auto div_out = field_out.divergence_info();
    const auto nodes = geometry::boundary_quadrature(domain.boundary(), boundary_nodes);
    std::vector<double> density(nodes.size());
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const double tin = lebesgue_normal_trace(field_in, domain, nodes[i].point, schedule, options, false);
        const double tout = lebesgue_normal_trace(field_out, domain, nodes[i].point, schedule, options, true);
        density[i] = -(tin + tout);
    }
    // The density is sampled at the coarse nodes and held constant over each
    // node's cell; phi is integrated over the cell with sub-nodes (curves only).
    const int sub = domain.dim() == 2 ? 64 : 1;
    const auto fine = geometry::boundary_quadrature(domain.boundary(), boundary_nodes * sub);
    const auto side_integrand = [](const Field& u, const DivergenceInfo& div, const TestFunction& phi) {
        return [&u, &div, &phi](const Vec& x) {
            double s = dot(u.eval(x), phi.gradient(x));
            if (div.tag == DivergenceInfo::Tag::absolutely_continuous) s += phi.value(x) * div.density(x);
            return s;
        };
    };
    std::vector<GluingResult> out;
    for (const auto& phi : testfns) {
        if (!phi.support) throw Error(ErrorCode::bad_region, "gluing test functions need compact support");
        GluingResult g;
        g.test_function = phi.name;
        const auto in = quadrature::integrate(side_integrand(field_in, div_in, phi),
                                              {domain, Ball{phi.support->center, phi.support->radius}, std::nullopt},
                                              options);
        const auto ext = quadrature::integrate(
            side_integrand(field_out, div_out, phi),
            {domain, BallExterior{phi.support->center, phi.support->radius}, std::nullopt}, options);
        g.measured = -(in.value + ext.value);
        g.error = in.error + ext.error;
        std::vector<double> pred(fine.size()), mass(fine.size());
        for (std::size_t i = 0; i < fine.size(); ++i) {
            const double v = phi.value(fine[i].point);
            pred[i] = fine[i].weight * density[i / static_cast<std::size_t>(sub)] * v;
            mass[i] = fine[i].weight * v;
        }
        g.predicted = pairwise_sum(pred);
        g.boundary_mass = pairwise_sum(mass);
        if (g.boundary_mass != 0.0) {
            g.measured_density = g.measured / g.boundary_mass;
            g.predicted_density = g.predicted / g.boundary_mass;
        }
        out.push_back(std::move(g));
    }
    return out;
}

ChainRuleResult chain_rule_check(const Field& field, const std::function<double(const Vec&)>& rho,
                                 const std::function<double(double)>& beta, const Domain& domain,
                                 const BoundaryPatch& patch, int n, const RadiusSchedule& schedule,
                                 const Options& options) {
    constexpr double kFloor = 1e-8;
    ChainRuleResult res;
    const auto nodes = geometry::boundary_quadrature(patch, n);
    double weighted = 0.0;
    double total_weight = 0.0;
    for (const auto& node : nodes) {
        const auto flux = [&](const std::function<double(const Vec&)>& s) {
            const auto g = [&](const Vec& y) {
                return s(y) * dot(field.eval(y), geometry::grad_distance_ae(domain, y));
            };
            return outward_limit(g, domain, node.point, schedule, options, BallSide::inside);
        };
        const double tu = flux([](const Vec&) { return 1.0; });
        ++res.nodes;
        if (std::abs(tu) < kFloor) {
            ++res.excluded;
            total_weight += node.weight;
            continue;
        }
        const double trho = flux(rho);
        const double tbeta = flux([&](const Vec& y) { return beta(rho(y)); });
        const double r = std::abs(tbeta - beta(trho / tu) * tu);
        res.max_residual = std::max(res.max_residual, r);
        weighted += node.weight * r;
        total_weight += node.weight;
    }
    res.mean_residual = total_weight > 0.0 ? weighted / total_weight : 0.0;
    return res;
}

}  // namespace tracelab::traces
