#include "tracelab/error.hpp"
#include "tracelab/parallel.hpp"

#include <algorithm>
#include <cstdlib>
#include <exception>
#include <string>
#include <thread>
#include <vector>

namespace tracelab {

std::string_view to_string(ErrorCode code) {
    switch (code) {
        case ErrorCode::outside_domain: return "OutsideDomain";
        case ErrorCode::on_null_set: return "OnNullSet";
        case ErrorCode::tol_not_reached: return "TolNotReached";
        case ErrorCode::bad_region: return "BadRegion";
        case ErrorCode::too_few_samples: return "TooFewSamples";
        case ErrorCode::level_mismatch: return "LevelMismatch";
        case ErrorCode::outside_slab: return "OutsideSlab";
        case ErrorCode::time_out_of_range: return "TimeOutOfRange";
        case ErrorCode::bad_config: return "BadConfig";
    }
    return "Unknown";
}

unsigned worker_count() {
    if (const char* env = std::getenv("TRACELAB_THREADS")) {
        try {
            int n = std::stoi(env);
            if (n > 0) return static_cast<unsigned>(n);
        } catch (const std::exception&) {
        }
    }
    return std::max(1u, std::thread::hardware_concurrency());
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
    const std::size_t workers = std::min<std::size_t>(worker_count(), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) body(i);
        return;
    }
    const std::size_t chunk = (n + workers - 1) / workers;
    std::vector<std::exception_ptr> failures(workers);
    {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        for (std::size_t w = 0; w < workers; ++w) {
            const std::size_t lo = w * chunk;
            const std::size_t hi = std::min(n, lo + chunk);
            if (lo >= hi) break;
            pool.emplace_back([lo, hi, w, &body, &failures] {
                try {
                    for (std::size_t i = lo; i < hi; ++i) body(i);
                } catch (...) {
                    failures[w] = std::current_exception();
                }
            });
        }
    }
    // Rethrow the failure of the lowest chunk so the reported error does not
    // depend on thread timing.
    for (auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
}

double pairwise_sum(std::span<const double> values) {
    if (values.size() <= 8) {
        double s = 0.0;
        for (double v : values) s += v;
        return s;
    }
    const std::size_t half = values.size() / 2;
    return pairwise_sum(values.first(half)) + pairwise_sum(values.subspan(half));
}

}  // namespace tracelab
