#pragma once

#include "tracelab/fields.hpp"
#include "tracelab/geometry.hpp"
#include "tracelab/quadrature.hpp"
#include "tracelab/test_functions.hpp"
#include "tracelab/transport.hpp"

#include <json.hpp>

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace tracelab::config {

using Json = nlohmann::json;

/// Read access to one JSON object. Every key that is read is remembered so
/// that finish() can reject the ones nobody asked for.
class Reader {
public:
    Reader(const Json& node, std::string path);

    bool has(std::string_view key) const;

    double number(std::string_view key) const;
    double number(std::string_view key, double fallback) const;
    std::int64_t integer(std::string_view key) const;
    std::int64_t integer(std::string_view key, std::int64_t fallback) const;
    std::string string(std::string_view key) const;
    std::string string(std::string_view key, std::string_view fallback) const;
    bool boolean(std::string_view key, bool fallback) const;
    /// Array of 2 or 3 numbers.
    Vec point(std::string_view key) const;
    std::vector<double> numbers(std::string_view key) const;
    std::vector<int> integers(std::string_view key) const;

    Reader object(std::string_view key) const;
    std::vector<Reader> objects(std::string_view key) const;

    /// Throws BadConfig naming the first key that was never read.
    void finish() const;

    [[noreturn]] void fail(std::string_view key, std::string_view message) const;
    std::string key_path(std::string_view key) const;
    const std::string& path() const { return path_; }

private:
    const Json& at(std::string_view key) const;

    const Json* node_;
    std::string path_;
    mutable std::set<std::string, std::less<>> used_;
};

geometry::Domain parse_domain(const Reader& r);
fields::Field parse_field(const Reader& r);
geometry::BoundaryPatch parse_patch(const Reader& r, const geometry::Domain& domain);
TestFunction parse_test_function(const Reader& r);
SpaceTimeTestFunction parse_space_time_test_function(const Reader& r);

struct ScalarMap {
    std::string name;
    std::function<double(double)> f;
};

/// C^1 functions beta used for renormalization and the chain rule.
ScalarMap parse_beta(const Reader& r);

quadrature::RadiusSchedule parse_schedule(const Reader& r);
quadrature::Options parse_quadrature(const Reader& r, quadrature::Options defaults);

}  // namespace tracelab::config
