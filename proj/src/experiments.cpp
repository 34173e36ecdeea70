#include "tracelab/experiments.hpp"

#include "experiment_context.hpp"
#include "tracelab/error.hpp"

#include <fstream>
#include <sstream>

namespace tracelab::experiments {

namespace detail {

void Context::check(const std::string& what, const Json& value, const Json& target, bool ok) {
    checks.push_back({{"name", what}, {"value", value}, {"target", target}, {"pass", ok}});
    pass = pass && ok;
}

void Context::profile(const std::string& label, const quadrature::LimitEstimate& est) {
    profiles[label] = report::estimate_json(est);
    file("profile-" + label + ".csv", report::profile_csv(est.samples));
}

}  // namespace detail

namespace {

struct Entry {
    std::string name;
    void (*fn)(detail::Context&);
    quadrature::Options options;
    quadrature::RadiusSchedule schedule;
};

const std::vector<Entry>& registry() {
    using quadrature::Mode;
    using quadrature::Options;
    using quadrature::RadiusSchedule;
    static const std::vector<Entry> entries = {
        {"gauss-green", detail::run_gauss_green, Options{.tol = 1e-9}, {}},
        {"trace-blowup", detail::run_trace_blowup, Options{.tol = 1e-6}, {}},
        {"tubular", detail::run_tubular, Options{.mode = Mode::monte_carlo, .tol = 2e-4}, {}},
        {"minkowski", detail::run_minkowski, Options{.tol = 1e-9}, {}},
        {"tiled-liminf", detail::run_tiled_liminf, Options{.tol = 1e-3}, RadiusSchedule{0.0625, 0.5, 9}},
        {"radial-dirac", detail::run_radial_dirac, Options{.tol = 1e-6}, {}},
        {"signed-flux", detail::run_signed_flux, Options{.tol = 1e-8}, {}},
        {"gluing", detail::run_gluing, Options{.tol = 1e-7}, {}},
        {"chain-rule", detail::run_chain_rule, Options{.tol = 1e-8}, {}},
        {"depauw-nonuniqueness", detail::run_depauw_nonuniqueness, Options{}, {}},
        {"renormalization-defect", detail::run_renormalization_defect, Options{}, {}},
        {"lift-trace", detail::run_lift_trace, Options{.tol = 1e-4}, RadiusSchedule{0.125, 0.5, 6}},
    };
    return entries;
}

}  // namespace

const std::vector<std::string>& names() {
    static const std::vector<std::string> out = [] {
        std::vector<std::string> v;
        for (const auto& e : registry()) v.push_back(e.name);
        return v;
    }();
    return out;
}

config::Json load(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::bad_config, "cannot read config file " + path.string());
    try {
        return config::Json::parse(in);
    } catch (const config::Json::parse_error& e) {
        throw Error(ErrorCode::bad_config, "config file " + path.string() + " is not valid JSON: " + e.what());
    }
}

report::Report run(std::string_view experiment, const config::Json& cfg, std::optional<std::uint64_t> seed_override) {
    const Entry* entry = nullptr;
    for (const auto& e : registry()) {
        if (e.name == experiment) entry = &e;
    }
    if (!entry) throw Error(ErrorCode::bad_config, "unknown experiment '" + std::string(experiment) + "'");
    if (!cfg.is_object()) throw Error(ErrorCode::bad_config, "config must be a JSON object");

    detail::Context ctx(std::string(experiment), config::Reader(cfg, ""));
    ctx.options = entry->options;
    ctx.schedule = entry->schedule;
    if (ctx.root.has("experiment") && ctx.root.string("experiment") != experiment)
        ctx.root.fail("experiment", "config is for '" + ctx.root.string("experiment") + "'");
    if (ctx.root.has("seed")) {
        const auto s = ctx.root.integer("seed");
        if (s < 0) ctx.root.fail("seed", "must be nonnegative");
        ctx.seed = static_cast<std::uint64_t>(s);
    }
    if (seed_override) ctx.seed = *seed_override;
    if (ctx.root.has("quadrature")) ctx.options = config::parse_quadrature(ctx.root.object("quadrature"), ctx.options);
    ctx.options.seed = ctx.seed;
    if (ctx.root.has("schedule")) ctx.schedule = config::parse_schedule(ctx.root.object("schedule"));

    entry->fn(ctx);

    report::Report rep;
    rep.pass = ctx.pass;
    rep.summary = {{"experiment", ctx.name},
                   {"inputs_hash", report::inputs_hash(ctx.name, cfg, ctx.seed)},
                   {"seed", ctx.seed},
                   {"quadrature",
                    {{"mode", std::string(quadrature::to_string(ctx.options.mode))},
                     {"tol", ctx.options.tol},
                     {"max_evaluations", ctx.options.max_evaluations}}},
                   {"profiles", ctx.profiles},
                   {"results", ctx.results},
                   {"checks", ctx.checks},
                   {"pass", ctx.pass}};
    rep.files = std::move(ctx.files);
    return rep;
}

}  // namespace tracelab::experiments
