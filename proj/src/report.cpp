#include "tracelab/report.hpp"

#include "tracelab/error.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace tracelab::report {

std::string sha256_hex(std::string_view bytes) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int len = 0;
    if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1)
        throw Error(ErrorCode::bad_config, "could not hash the inputs");
    std::string hex;
    char buf[3];
    for (unsigned int i = 0; i < len; ++i) {
        std::snprintf(buf, sizeof buf, "%02x", digest[i]);
        hex += buf;
    }
    return hex;
}

std::string inputs_hash(std::string_view experiment, const Json& config, std::uint64_t seed) {
    return sha256_hex(std::string(experiment) + "\n" + config.dump() + "\n" + std::to_string(seed));
}

std::string format_double(double x) {
    if (std::isnan(x)) return "nan";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string profile_csv(const std::vector<quadrature::Sample>& samples) {
    std::string out = "r,value,error\n";
    for (const auto& s : samples) {
        out += format_double(s.r) + "," + format_double(s.value) + "," + format_double(s.error) + "\n";
    }
    return out;
}

Json estimate_json(const quadrature::LimitEstimate& est) {
    Json j;
    j["samples"] = Json::array();
    for (const auto& s : est.samples) j["samples"].push_back({{"r", s.r}, {"value", s.value}, {"error", s.error}});
    j["limit"] = est.limit ? Json(*est.limit) : Json(nullptr);
    j["liminf_band"] = {est.liminf_band.lo, est.liminf_band.hi};
    j["limsup_band"] = {est.limsup_band.lo, est.limsup_band.hi};
    j["classification"] = std::string(quadrature::to_string(est.classification));
    j["slope"] = est.slope;
    j["oscillation"] = est.oscillation;
    return j;
}

std::string pattern_pgm(const transport::DyadicPattern& p) {
    std::string out = "P5\n" + std::to_string(p.columns()) + " " + std::to_string(p.rows()) + "\n255\n";
    out.reserve(out.size() + p.columns() * p.rows());
    for (std::size_t r = p.rows(); r-- > 0;) {
        for (std::size_t c = 0; c < p.columns(); ++c) out += static_cast<char>(p.at(c, r) > 0 ? 255 : 0);
    }
    return out;
}

std::string pattern_csv(const transport::DyadicPattern& p) {
    std::string out;
    for (std::size_t r = 0; r < p.rows(); ++r) {
        for (std::size_t c = 0; c < p.columns(); ++c) {
            if (c) out += ',';
            out += p.at(c, r) > 0 ? "1" : "-1";
        }
        out += '\n';
    }
    return out;
}

void write(const Report& report, const std::filesystem::path& dir) {
    std::filesystem::create_directories(dir);
    const auto put = [&](const std::string& name, const std::string& bytes) {
        std::ofstream f(dir / name, std::ios::binary);
        f << bytes;
        if (!f) throw Error(ErrorCode::bad_config, "cannot write " + (dir / name).string());
    };
    put("summary.json", report.summary.dump(2) + "\n");
    for (const auto& file : report.files) put(file.name, file.bytes);
}

}  // namespace tracelab::report
