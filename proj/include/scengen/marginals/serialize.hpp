#pragma once

#include <json.hpp>

#include <fstream>
#include <string>
#include <vector>

#include "scengen/copula/io.hpp"
#include "scengen/errors.hpp"
#include "scengen/marginals/linear_model.hpp"

namespace scengen {

inline constexpr int kModelFormat = 1;

/// Versioned JSON: variant, shape, kernel, levels, seed, row-major weights.
inline nlohmann::json model_to_json(const LinearQuantileModel& m) {
    const auto& s = m.shape();
    std::vector<double> w(static_cast<std::size_t>(m.weights().size()));
    for (Eigen::Index r = 0, k = 0; r < m.weights().rows(); ++r)
        for (Eigen::Index c = 0; c < m.weights().cols(); ++c) w[static_cast<std::size_t>(k++)] = m.weights()(r, c);
    auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
    return {{"format_version", kModelFormat},
            {"variant", to_string(m.variant())},
            {"shape", {{"series", s.series}, {"covariates", s.covariates}, {"past", s.past}, {"horizon", s.horizon},
                       {"quantiles", s.quantiles}}},
            {"kernel", m.kernel()},
            {"quantile_levels", m.levels().levels()},
            {"training_seed", m.seed()},
            {"per_series", m.per_series()},
            {"covariate_mean", vec(m.covariate_mean())},
            {"covariate_scale", vec(m.covariate_scale())},
            {"weights", {{"rows", m.weights().rows()}, {"cols", m.weights().cols()}, {"values", w}}},
            {"bias", vec(m.bias())}};
}

inline LinearQuantileModel model_from_json(const nlohmann::json& j) {
    try {
        if (j.at("format_version").get<int>() != kModelFormat) {
            throw Error(ErrorCode::VersionMismatch, "model format " + j.at("format_version").dump() + ", expected " +
                                                        std::to_string(kModelFormat));
        }
        const auto& s = j.at("shape");
        ModelShape shape{s.at("series").get<std::size_t>(), s.at("covariates").get<std::size_t>(),
                         s.at("past").get<std::size_t>(), s.at("horizon").get<std::size_t>(),
                         s.at("quantiles").get<std::size_t>()};
        LinearQuantileModel m(parse_variant(j.at("variant").get<std::string>()), shape,
                              QuantileSet(j.at("quantile_levels").get<std::vector<double>>()),
                              j.at("kernel").get<std::size_t>());
        m.set_training_info(j.at("training_seed").get<std::uint64_t>(), j.at("per_series").get<bool>());
        const auto w = j.at("weights").at("values").get<std::vector<double>>();
        if (w.size() != static_cast<std::size_t>(m.weights().size())) {
            throw Error(ErrorCode::ShapeMismatch, "weight array has " + std::to_string(w.size()) + " values, shape needs " +
                                                      std::to_string(m.weights().size()));
        }
        for (Eigen::Index r = 0, k = 0; r < m.weights().rows(); ++r)
            for (Eigen::Index c = 0; c < m.weights().cols(); ++c) m.weights()(r, c) = w[static_cast<std::size_t>(k++)];
        auto load = [](const std::vector<double>& v, Eigen::Index n, const char* what) {
            if (static_cast<Eigen::Index>(v.size()) != n) throw Error(ErrorCode::ShapeMismatch, std::string(what) + " has the wrong length");
            return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), n));
        };
        m.bias() = load(j.at("bias").get<std::vector<double>>(), m.bias().size(), "bias");
        m.set_covariate_scaling(
            load(j.at("covariate_mean").get<std::vector<double>>(), static_cast<Eigen::Index>(shape.covariates), "covariate_mean"),
            load(j.at("covariate_scale").get<std::vector<double>>(), static_cast<Eigen::Index>(shape.covariates), "covariate_scale"));
        return m;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::VersionMismatch, std::string("malformed model JSON: ") + e.what());
    }
}

/// `origin,location,step,q10,...` with one row per (origin, location, step).
/// Steps count from 1; values are multiplied by `scale[i]` (capacity) first.
inline void write_quantiles_csv(const std::string& path, const std::vector<std::size_t>& origins,
                                const std::vector<QuantileTensor>& forecasts, const QuantileSet& levels,
                                const std::vector<std::string>& location_ids, const std::vector<double>& scale) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "origin,location,step";
    for (double q : levels.levels()) out << ',' << QuantileSet::label(q);
    out << '\n';
    for (std::size_t n = 0; n < forecasts.size(); ++n) {
        const auto& f = forecasts[n];
        for (std::size_t i = 0; i < f.series(); ++i) {
            for (std::size_t h = 0; h < f.horizon(); ++h) {
                out << origins[n] << ',' << location_ids[i] << ',' << h + 1;
                for (double v : f.cell(i, h)) out << ',' << detail::format_double(v * scale[i]);
                out << '\n';
            }
        }
    }
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace scengen
