#pragma once

#include "tracelab/quadrature.hpp"
#include "tracelab/transport.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace tracelab::report {

using Json = nlohmann::json;

struct File {
    std::string name;
    std::string bytes;
};

/// Everything an experiment produces. Nothing here depends on wall-clock
/// time or worker count, so equal inputs give equal bytes.
struct Report {
    Json summary;
    bool pass = false;
    std::vector<File> files;
};

/// Lowercase hex SHA-256.
std::string sha256_hex(std::string_view bytes);

/// Hex SHA-256 of the experiment name, the canonical config dump and the seed.
std::string inputs_hash(std::string_view experiment, const Json& config, std::uint64_t seed);

/// CSV with columns r,value,error.
std::string profile_csv(const std::vector<quadrature::Sample>& samples);

/// Samples, limit, bands and classification.
Json estimate_json(const quadrature::LimitEstimate& est);

/// Binary greymap (P5): +1 white, -1 black, first row at the top of the cell.
std::string pattern_pgm(const transport::DyadicPattern& p);

/// One row per grid row, values +1/-1.
std::string pattern_csv(const transport::DyadicPattern& p);

/// Doubles printed with 17 significant digits.
std::string format_double(double x);

/// Writes summary.json and the files into dir (created when missing).
void write(const Report& report, const std::filesystem::path& dir);

}  // namespace tracelab::report
