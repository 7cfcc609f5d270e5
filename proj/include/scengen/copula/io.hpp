#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <array>
#include <bit>
#include <charconv>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <string>
#include <vector>

#include "scengen/copula/copula.hpp"
#include "scengen/errors.hpp"

namespace scengen {

namespace detail {

class LeWriter {
public:
    explicit LeWriter(const std::string& path) : path_(path), out_(path, std::ios::binary) {
        if (!out_) throw Error(ErrorCode::IoError, "cannot write " + path);
    }
    void bytes(const void* p, std::size_t n) { out_.write(static_cast<const char*>(p), static_cast<std::streamsize>(n)); }
    void u32(std::uint32_t v) {
        std::array<unsigned char, 4> b{};
        for (int k = 0; k < 4; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
        bytes(b.data(), 4);
    }
    void u64(std::uint64_t v) {
        std::array<unsigned char, 8> b{};
        for (int k = 0; k < 8; ++k) b[k] = static_cast<unsigned char>(v >> (8 * k));
        bytes(b.data(), 8);
    }
    void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
    void close() {
        out_.close();
        if (!out_) throw Error(ErrorCode::IoError, "failed writing " + path_);
    }

private:
    std::string path_;
    std::ofstream out_;
};

class LeReader {
public:
    explicit LeReader(const std::string& path) : path_(path), in_(path, std::ios::binary) {
        if (!in_) throw Error(ErrorCode::IoError, "cannot read " + path);
    }
    void bytes(void* p, std::size_t n) {
        in_.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
        if (!in_) throw Error(ErrorCode::IoError, path_ + ": truncated file");
    }
    std::uint32_t u32() {
        std::array<unsigned char, 4> b{};
        bytes(b.data(), 4);
        std::uint32_t v = 0;
        for (int k = 3; k >= 0; --k) v = v << 8 | b[k];
        return v;
    }
    std::uint64_t u64() {
        std::array<unsigned char, 8> b{};
        bytes(b.data(), 8);
        std::uint64_t v = 0;
        for (int k = 7; k >= 0; --k) v = v << 8 | b[k];
        return v;
    }
    double f64() { return std::bit_cast<double>(u64()); }
    void expect_magic(const char (&magic)[5]) {
        char got[4];
        bytes(got, 4);
        if (std::memcmp(got, magic, 4) != 0) throw Error(ErrorCode::VersionMismatch, path_ + ": wrong file type");
    }
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
    std::ifstream in_;
};

inline std::string format_double(double v) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

inline constexpr std::uint32_t kCorrelationFormat = 1;
inline constexpr std::uint32_t kScenarioFormat = 1;

/// "SGCR", u32 version, u64 d, then d·d row-major little-endian float64.
inline void write_correlation_binary(const std::string& path, const Eigen::MatrixXd& r) {
    detail::LeWriter w(path);
    w.bytes("SGCR", 4);
    w.u32(kCorrelationFormat);
    w.u64(static_cast<std::uint64_t>(r.rows()));
    for (Eigen::Index i = 0; i < r.rows(); ++i)
        for (Eigen::Index j = 0; j < r.cols(); ++j) w.f64(r(i, j));
    w.close();
}

inline Eigen::MatrixXd read_correlation_binary(const std::string& path) {
    detail::LeReader rd(path);
    rd.expect_magic("SGCR");
    if (const auto v = rd.u32(); v != kCorrelationFormat) {
        throw Error(ErrorCode::VersionMismatch, path + ": correlation format " + std::to_string(v) + ", expected " +
                                                    std::to_string(kCorrelationFormat));
    }
    const auto d = static_cast<Eigen::Index>(rd.u64());
    Eigen::MatrixXd r(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) r(i, j) = rd.f64();
    return r;
}

/// Repair metadata written next to the binary.
inline nlohmann::json correlation_metadata(const GaussianCopula& c) {
    const auto& r = c.correlation();
    return {{"format_version", kCorrelationFormat},
            {"dimension", c.dim()},
            {"samples", r.samples},
            {"shrinkage", r.shrinkage},
            {"min_eigenvalue_before_repair", r.min_eigen_before},
            {"min_eigenvalue_after_repair", r.min_eigen_after},
            {"repaired", r.repaired},
            {"repair_rounds", r.repair_rounds},
            {"jitter", c.jitter()}};
}

/// Long-form CSV `origin,scenario,location,step,value_mw`. Steps count from 1.
inline void write_scenarios_csv(const std::string& path, const std::vector<ScenarioSet>& sets,
                                const std::vector<std::string>& location_ids) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "origin,scenario,location,step,value_mw\n";
    for (const auto& set : sets) {
        for (std::size_t s = 0; s < set.size(); ++s) {
            const auto& z = set.scenarios[s];
            for (std::size_t i = 0; i < set.series; ++i) {
                const std::string& id = i < location_ids.size() ? location_ids[i] : std::to_string(i);
                for (std::size_t h = 0; h < set.horizon; ++h) {
                    out << set.origin << ',' << s << ',' << id << ',' << h + 1 << ','
                        << detail::format_double(z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h))) << '\n';
                }
            }
        }
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

/// "SGSC", u32 version, u64 lineage hash, u64 set count; per set:
/// u64 origin, u32 mode (0 marginal, 1 copula), u64 seed, u64 S, u64 D, u64 H,
/// then S·D·H float64 ordered scenario, location, step.
inline void write_scenarios_binary(const std::string& path, const std::vector<ScenarioSet>& sets,
                                   std::uint64_t lineage = 0) {
    detail::LeWriter w(path);
    w.bytes("SGSC", 4);
    w.u32(kScenarioFormat);
    w.u64(lineage);
    w.u64(sets.size());
    for (const auto& set : sets) {
        w.u64(set.origin);
        w.u32(set.mode == ScenarioMode::Copula ? 1u : 0u);
        w.u64(set.seed);
        w.u64(set.size());
        w.u64(set.series);
        w.u64(set.horizon);
        for (const auto& z : set.scenarios)
            for (Eigen::Index i = 0; i < z.rows(); ++i)
                for (Eigen::Index h = 0; h < z.cols(); ++h) w.f64(z(i, h));
    }
    w.close();
}

struct ScenarioFile {
    std::uint64_t lineage = 0;
    std::vector<ScenarioSet> sets;
};

inline ScenarioFile read_scenarios_binary(const std::string& path) {
    detail::LeReader rd(path);
    rd.expect_magic("SGSC");
    if (const auto v = rd.u32(); v != kScenarioFormat) {
        throw Error(ErrorCode::VersionMismatch, path + ": scenario format " + std::to_string(v) + ", expected " +
                                                    std::to_string(kScenarioFormat));
    }
    ScenarioFile f;
    f.lineage = rd.u64();
    const auto count = rd.u64();
    f.sets.resize(count);
    for (auto& set : f.sets) {
        set.origin = rd.u64();
        set.mode = rd.u32() == 1 ? ScenarioMode::Copula : ScenarioMode::MarginalOnly;
        set.seed = rd.u64();
        const auto S = rd.u64();
        set.series = rd.u64();
        set.horizon = rd.u64();
        set.scenarios.assign(S, Eigen::MatrixXd(static_cast<Eigen::Index>(set.series),
                                                static_cast<Eigen::Index>(set.horizon)));
        for (auto& z : set.scenarios)
            for (Eigen::Index i = 0; i < z.rows(); ++i)
                for (Eigen::Index h = 0; h < z.cols(); ++h) z(i, h) = rd.f64();
    }
    return f;
}

}  // namespace scengen
