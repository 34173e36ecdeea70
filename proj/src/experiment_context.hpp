#pragma once

#include "tracelab/config.hpp"
#include "tracelab/report.hpp"

#include <string>

namespace tracelab::experiments::detail {

using config::Json;
using config::Reader;

/// State shared by one experiment run: the parsed common settings and the
/// report being assembled.
struct Context {
    Context(std::string name_, Reader root_) : name(std::move(name_)), root(std::move(root_)) {}

    std::string name;
    Reader root;
    std::uint64_t seed = 0;
    quadrature::Options options;
    quadrature::RadiusSchedule schedule;
    Json results = Json::object();
    Json checks = Json::array();
    Json profiles = Json::object();
    std::vector<report::File> files;
    bool pass = true;

    void check(const std::string& what, const Json& value, const Json& target, bool ok);
    void profile(const std::string& label, const quadrature::LimitEstimate& est);
    void file(std::string name, std::string bytes) { files.push_back({std::move(name), std::move(bytes)}); }
};

void run_gauss_green(Context& ctx);
void run_trace_blowup(Context& ctx);
void run_tubular(Context& ctx);
void run_minkowski(Context& ctx);
void run_tiled_liminf(Context& ctx);
void run_radial_dirac(Context& ctx);
void run_signed_flux(Context& ctx);
void run_gluing(Context& ctx);
void run_chain_rule(Context& ctx);
void run_depauw_nonuniqueness(Context& ctx);
void run_renormalization_defect(Context& ctx);
void run_lift_trace(Context& ctx);

}  // namespace tracelab::experiments::detail
