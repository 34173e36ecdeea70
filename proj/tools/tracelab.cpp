#include "tracelab/error.hpp"
#include "tracelab/experiments.hpp"

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

namespace {

constexpr int kPass = 0;
constexpr int kFail = 1;
constexpr int kConfigError = 2;

std::string experiment_list() {
    std::string s;
    for (const auto& n : tracelab::experiments::names()) s += (s.empty() ? "" : ", ") + n;
    return s;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"tracelab: normal traces, Minkowski contents and transport experiments"};
    std::string experiment;
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir;
    app.add_option("experiment", experiment, "One of: " + experiment_list())->required();
    app.add_option("--config", config_path, "JSON config file")->required();
    app.add_option("--seed", seed, "Overrides the seed in the config");
    app.add_option("--out", out_dir, "Output directory (default: out/<experiment>)");
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kPass : kConfigError;
    }
    if (out_dir.empty()) out_dir = "out/" + experiment;

    try {
        const auto cfg = tracelab::experiments::load(config_path);
        const auto rep = tracelab::experiments::run(experiment, cfg, seed);
        tracelab::report::write(rep, out_dir);
        for (const auto& c : rep.summary["checks"]) {
            std::cout << (c["pass"].get<bool>() ? "ok   " : "FAIL ") << c["name"].get<std::string>() << "\n";
        }
        std::cout << experiment << ": " << (rep.pass ? "pass" : "fail") << " (" << out_dir << ")\n";
        return rep.pass ? kPass : kFail;
    } catch (const tracelab::Error& e) {
        std::cerr << "tracelab: " << e.what() << "\n";
        return e.code() == tracelab::ErrorCode::bad_config ? kConfigError : kFail;
    } catch (const std::exception& e) {
        std::cerr << "tracelab: " << e.what() << "\n";
        return kFail;
    }
}
