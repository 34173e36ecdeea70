#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace tracelab {

/// Failure categories shared by every module.
enum class ErrorCode {
    outside_domain,
    on_null_set,
    tol_not_reached,
    bad_region,
    too_few_samples,
    level_mismatch,
    outside_slab,
    time_out_of_range,
    bad_config,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace tracelab
