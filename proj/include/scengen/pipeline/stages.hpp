#pragma once

#include <json.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scengen/copula/copula.hpp"
#include "scengen/copula/io.hpp"
#include "scengen/data_model.hpp"
#include "scengen/errors.hpp"
#include "scengen/marginals/linear_model.hpp"
#include "scengen/marginals/serialize.hpp"
#include "scengen/metrics.hpp"
#include "scengen/pipeline/config.hpp"
#include "scengen/pipeline/split.hpp"
#include "scengen/random.hpp"

namespace scengen {

inline constexpr int kArtifactFormat = 1;

// ---------------------------------------------------------------------------
// Inputs

struct InputData {
    SeriesPanel targets;
    std::optional<CovariatePanel> covariates;
    CapacityOverrides overrides;
    std::uint64_t content_hash = 0;  ///< over the raw bytes of every input file
};

namespace detail {

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot read " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline std::string hex(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

inline std::uint64_t parse_hex(const std::string& s) { return std::stoull(s, nullptr, 16); }

inline nlohmann::json read_json(const std::string& path) {
    try {
        return nlohmann::json::parse(read_file(path));
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::VersionMismatch, path + ": " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << text;
    if (!out) throw Error(ErrorCode::IoError, "failed writing " + path);
}

}  // namespace detail

/// In-memory inputs (synthetic runs and tests). The hash covers the values.
inline InputData make_inputs(SeriesPanel targets, std::optional<CovariatePanel> covariates,
                             CapacityOverrides overrides = {}) {
    InputData in{std::move(targets), std::move(covariates), std::move(overrides), 0};
    const auto& v = in.targets.values();
    in.content_hash = fnv1a64(std::string_view(reinterpret_cast<const char*>(v.data()), sizeof(double) * v.size()));
    if (in.covariates) {
        const auto& c = in.covariates->values();
        in.content_hash = mix64(in.content_hash ^ fnv1a64(std::string_view(reinterpret_cast<const char*>(c.data()),
                                                                            sizeof(double) * c.size())));
    }
    return in;
}

/// Loads targets, covariates (interpolated onto the target grid when coarser,
/// plus optional time encodings) and capacity overrides.
inline InputData load_inputs(const RunConfig& c) {
    require_inputs(c);
    CsvOptions opt;
    opt.forward_fill = c.forward_fill;
    InputData in;
    in.targets = load_series_csv(c.targets_path, opt);
    std::uint64_t h = fnv1a64(detail::read_file(c.targets_path));
    if (!c.covariates_path.empty()) {
        auto raw = load_panel_csv<PanelKind::CoarseCovariate>(c.covariates_path, opt);
        in.covariates = raw.timestamps() == in.targets.timestamps()
                            ? std::move(raw)
                            : interpolate_covariates(raw, in.targets.timestamps());
        h = mix64(h ^ fnv1a64(detail::read_file(c.covariates_path)));
    }
    if (c.time_encodings) {
        auto enc = time_encodings(in.targets.timestamps());
        in.covariates = in.covariates ? stack_covariates(*in.covariates, enc) : std::move(enc);
    }
    if (!c.capacities_path.empty()) {
        in.overrides = load_capacities_csv(c.capacities_path);
        h = mix64(h ^ fnv1a64(detail::read_file(c.capacities_path)));
    }
    in.content_hash = h;
    return in;
}

// ---------------------------------------------------------------------------
// Lineage: each stage hashes its own settings together with its upstream hash.

struct Lineage {
    std::uint64_t fit = 0, copula = 0, scenarios = 0;
};

inline Lineage lineage_of(const RunConfig& c, std::uint64_t data_hash) {
    const auto& m = c.source;
    std::string fit_text = detail::hex(data_hash) + "\n";
    for (const char* section : {"data", "window", "model", "quantiles", "split"}) fit_text += m.to_text(section);
    fit_text += "seed = " + m.raw("run.seed") + "\nsplit_index = " + m.raw("run.split_index") + "\n";
    Lineage l;
    l.fit = fnv1a64(fit_text);
    l.copula = fnv1a64(detail::hex(l.fit) + "\n" + m.to_text("copula"));
    l.scenarios = fnv1a64(detail::hex(l.copula) + "\n" + m.to_text("scenarios"));
    return l;
}

// ---------------------------------------------------------------------------
// In-memory stages

struct PreparedSplit {
    SplitTriple split;
    CapacityVector capacity;
    SeriesPanel normalized;     ///< capacity factors
    std::size_t clamped = 0;
};

inline PreparedSplit prepare_split(const InputData& in, const SplitTriple& split) {
    PreparedSplit p;
    p.split = split;
    p.capacity = derive_capacity(in.targets, split.train.end, in.overrides);
    auto norm = normalize(in.targets, p.capacity);
    p.normalized = std::move(norm.panel);
    p.clamped = norm.clamped;
    return p;
}

inline const CovariatePanel* model_covariates(const InputData& in, const RunConfig& c) {
    return c.use_covariates && in.covariates ? &*in.covariates : nullptr;
}

struct FitOutcome {
    LinearQuantileModel model;
    TrainReport report;
    std::size_t training_windows = 0;
    double validation_pinball = std::numeric_limits<double>::quiet_NaN();
};

inline FitOutcome fit_model(const InputData& in, const PreparedSplit& p, const RunConfig& c, LinearVariant variant) {
    const auto range = origins_within(p.split.train, c.window);
    if (!range) {
        throw Error(ErrorCode::InsufficientData, "training range of " + std::to_string(p.split.train.size()) +
                                                     " hours cannot hold one window");
    }
    const auto* covs = model_covariates(in, c);
    const auto windows = build_windows(p.normalized, covs, c.window, range, c.window_stride);
    FitOutcome out;
    out.training_windows = windows.size();
    out.model = fit_linear_quantile(windows, c.levels, variant, c.train, c.kernel, &out.report);
    // Validation is reported, never used for model selection.
    if (const auto vr = test_origins(p.split.validation, c.window)) {
        const auto vw = build_windows(p.normalized, covs, c.window, vr, c.split.eval_stride);
        out.validation_pinball = evaluate_pinball(out.model, vw);
    }
    return out;
}

/// Forecasts in target units for a run of origins.
struct ForecastSet {
    std::vector<std::size_t> origins;
    std::vector<QuantileTensor> quantiles;  ///< capacity factors, as predicted
    std::vector<MarginalGrid> marginals;    ///< MW, support [0, capacity]
    std::vector<Eigen::MatrixXd> actuals;   ///< MW
};

inline ForecastSet forecast_origins(const LinearQuantileModel& model, const InputData& in, const PreparedSplit& p,
                                    const RunConfig& c, const OriginRange& range, std::size_t stride) {
    const auto windows = build_windows(p.normalized, model_covariates(in, c), c.window, range, stride);
    ForecastSet f;
    f.quantiles = predict_quantiles(model, windows);
    const auto& caps = p.capacity.values();
    for (std::size_t n = 0; n < windows.size(); ++n) {
        const auto t = windows[n].origin;
        f.origins.push_back(t);
        f.marginals.push_back(marginal_grid(f.quantiles[n], c.levels, caps, caps, c.tails));
        f.actuals.push_back(in.targets.values().middleCols(static_cast<Eigen::Index>(t),
                                                           static_cast<Eigen::Index>(c.window.horizon)));
    }
    return f;
}

/// Estimates the copula from PIT values of the fitted model on training windows.
inline GaussianCopula fit_copula(const LinearQuantileModel& model, const InputData& in, const PreparedSplit& p,
                                 const RunConfig& c) {
    const auto range = origins_within(p.split.train, c.window);
    if (!range) throw Error(ErrorCode::InsufficientData, "training range cannot hold one window");
    const auto f = forecast_origins(model, in, p, c, *range, c.copula_stride);
    const auto pit = pit_transform(std::span<const Eigen::MatrixXd>(f.actuals), f.marginals, c.pit_clamp, false);
    CorrelationOptions opt;
    opt.shrinkage = c.shrinkage;
    return make_copula(estimate_correlation(pit, opt));
}

inline std::uint64_t scenario_seed(std::uint64_t root, std::size_t origin) {
    return mix64(derive_seed(root, "scenarios") ^ mix64(origin));
}

inline std::vector<ScenarioSet> make_scenarios(const ForecastSet& f, const GaussianCopula* copula, std::size_t S,
                                               std::uint64_t root_seed, unsigned threads) {
    std::vector<ScenarioSet> out;
    out.reserve(f.origins.size());
    for (std::size_t n = 0; n < f.origins.size(); ++n) {
        out.push_back(generate_scenarios(copula, f.marginals[n], S, scenario_seed(root_seed, f.origins[n]),
                                         f.origins[n], threads));
    }
    return out;
}

/// Index of the level nearest to the median; its quantile is the point forecast.
inline std::size_t median_index(const QuantileSet& levels) {
    std::size_t best = 0;
    for (std::size_t k = 1; k < levels.size(); ++k)
        if (std::fabs(levels[k] - 0.5) < std::fabs(levels[best] - 0.5)) best = k;
    return best;
}

inline Eigen::MatrixXd point_forecast(const QuantileTensor& q, std::size_t level_index, const std::vector<double>& scale) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(q.series()), static_cast<Eigen::Index>(q.horizon()));
    for (std::size_t i = 0; i < q.series(); ++i)
        for (std::size_t h = 0; h < q.horizon(); ++h)
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(h)) = q.at(i, h, level_index) * scale[i];
    return out;
}

inline EvaluationBatch evaluation_batch(const ForecastSet& f, const std::vector<ScenarioSet>* sets,
                                        const CapacityVector& cap, const QuantileSet& levels) {
    EvaluationBatch b;
    b.capacities = cap;
    const auto mid = median_index(levels);
    for (std::size_t n = 0; n < f.origins.size(); ++n) {
        EvaluationEntry e;
        e.origin = f.origins[n];
        e.actual = f.actuals[n];
        e.forecast = point_forecast(f.quantiles[n], mid, cap.values());
        if (sets) e.scenarios = (*sets)[n].scenarios;
        b.entries.push_back(std::move(e));
    }
    return b;
}

// ---------------------------------------------------------------------------
// Backtest

struct BacktestCell {
    LinearVariant variant;
    ScenarioMode mode;
    ScoreReport report;
};

struct BacktestResult {
    std::vector<BacktestCell> cells;
    std::size_t splits = 0;

    const ScoreReport& report(LinearVariant v, ScenarioMode m) const {
        for (const auto& c : cells)
            if (c.variant == v && c.mode == m) return c.report;
        throw Error(ErrorCode::ConfigError, "no backtest result for that variant and mode");
    }
};

/// Hook for callers that persist per-split artifacts.
struct BacktestSink {
    virtual ~BacktestSink() = default;
    virtual void scenarios(std::size_t /*split*/, LinearVariant, ScenarioMode, const std::vector<ScenarioSet>&) {}
};

/// For each split and variant: fit on train, estimate the copula on train,
/// forecast the test origins, draw both scenario modes and score them. Test
/// origins of all splits are pooled per (variant, mode).
inline BacktestResult run_backtest(const InputData& in, const RunConfig& c, BacktestSink* sink = nullptr) {
    const auto root = c.require_seed();
    auto plan = make_split_plan(in.targets.timestamps(), c.split, c.window);
    if (c.max_splits > 0 && plan.splits.size() > c.max_splits) plan.splits.resize(c.max_splits);
    const ScenarioMode modes[] = {ScenarioMode::MarginalOnly, ScenarioMode::Copula};

    std::map<std::pair<int, int>, std::vector<ScoreReport>> per_split;
    for (std::size_t k = 0; k < plan.splits.size(); ++k) {
        const auto prep = prepare_split(in, plan.splits[k]);
        const auto range = test_origins(prep.split.test, c.window);
        if (!range) throw Error(ErrorCode::InsufficientData, "split " + std::to_string(k) + ": test range too short");
        for (auto variant : c.backtest_variants) {
            const std::string where = "split " + std::to_string(k) + " (" + std::string(to_string(variant)) + "): ";
            try {
                const auto fit = fit_model(in, prep, c, variant);
                const auto copula = fit_copula(fit.model, in, prep, c);
                const auto f = forecast_origins(fit.model, in, prep, c, *range, c.split.eval_stride);
                for (auto mode : modes) {
                    const auto sets =
                        make_scenarios(f, mode == ScenarioMode::Copula ? &copula : nullptr, c.scenarios, root, c.threads);
                    if (sink) sink->scenarios(k, variant, mode, sets);
                    const auto batch = evaluation_batch(f, &sets, prep.capacity, c.levels);
                    per_split[{static_cast<int>(variant), static_cast<int>(mode)}].push_back(
                        score_report(batch, c.metrics, c.score));
                }
            } catch (const Error& e) {
                throw Error(e.code(), where + e.what());
            }
        }
    }
    BacktestResult result;
    result.splits = plan.splits.size();
    for (auto variant : c.backtest_variants) {
        for (auto mode : modes) {
            result.cells.push_back(
                {variant, mode, merge_reports(per_split.at({static_cast<int>(variant), static_cast<int>(mode)}))});
        }
    }
    return result;
}

}  // namespace scengen
