#pragma once

#include "tracelab/config.hpp"
#include "tracelab/report.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace tracelab::experiments {

/// Names accepted by run(), in a fixed order.
const std::vector<std::string>& names();

/// Parses a JSON config file; syntax errors raise BadConfig.
config::Json load(const std::filesystem::path& path);

/// Runs one experiment. Config problems raise BadConfig naming the offending
/// key; unknown keys are rejected before any computation starts.
report::Report run(std::string_view experiment, const config::Json& cfg,
                   std::optional<std::uint64_t> seed_override = std::nullopt);

}  // namespace tracelab::experiments
