#pragma once

#include <Eigen/Dense>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "scengen/copula/copula.hpp"
#include "scengen/copula/io.hpp"
#include "scengen/data_model.hpp"
#include "scengen/errors.hpp"
#include "scengen/parallel.hpp"

namespace scengen {

/// One forecast origin: the realized D×H target plus a point forecast and/or
/// an ensemble.
struct EvaluationEntry {
    std::size_t origin = 0;
    Eigen::MatrixXd actual;
    std::optional<Eigen::MatrixXd> forecast;
    std::vector<Eigen::MatrixXd> scenarios;
};

struct EvaluationBatch {
    std::vector<EvaluationEntry> entries;
    CapacityVector capacities;

    std::size_t series() const { return entries.empty() ? 0 : static_cast<std::size_t>(entries.front().actual.rows()); }
    std::size_t horizon() const { return entries.empty() ? 0 : static_cast<std::size_t>(entries.front().actual.cols()); }

    /// Consistent shapes, finite actuals, one capacity per series.
    void validate() const {
        const auto D = series(), H = horizon();
        for (const auto& e : entries) {
            const std::string where = "origin " + std::to_string(e.origin);
            auto same = [&](const Eigen::MatrixXd& m) {
                return static_cast<std::size_t>(m.rows()) == D && static_cast<std::size_t>(m.cols()) == H;
            };
            if (!same(e.actual)) throw Error(ErrorCode::DimensionMismatch, where + ": actual has a different shape");
            if (!e.actual.allFinite()) throw Error(ErrorCode::NonNumericCell, where + ": actual has non-finite values");
            if (e.forecast && !same(*e.forecast)) {
                throw Error(ErrorCode::DimensionMismatch, where + ": forecast has a different shape");
            }
            for (const auto& s : e.scenarios) {
                if (!same(s)) throw Error(ErrorCode::DimensionMismatch, where + ": scenario has a different shape");
            }
        }
        if (!entries.empty() && capacities.size() != D) {
            throw Error(ErrorCode::DimensionMismatch, std::to_string(capacities.size()) + " capacities for " +
                                                          std::to_string(D) + " series");
        }
    }
};

// ---------------------------------------------------------------------------
// Per-origin building blocks

namespace detail {

inline const Eigen::MatrixXd& forecast_of(const EvaluationEntry& e) {
    if (!e.forecast) throw Error(ErrorCode::MissingForecast, "origin " + std::to_string(e.origin) + " has no point forecast");
    return *e.forecast;
}

inline const std::vector<Eigen::MatrixXd>& scenarios_of(const EvaluationEntry& e, std::size_t min_size = 1) {
    if (e.scenarios.size() < min_size) {
        throw Error(ErrorCode::NoScenarios, "origin " + std::to_string(e.origin) + " has " +
                                                std::to_string(e.scenarios.size()) + " scenarios, need " +
                                                std::to_string(min_size));
    }
    return e.scenarios;
}

}  // namespace detail

/// Mean |ẑ − z| / capacity over cells, in percent.
inline double nmae_ind(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& forecast, const CapacityVector& cap) {
    double sum = 0.0;
    for (Eigen::Index i = 0; i < actual.rows(); ++i) {
        sum += (forecast.row(i) - actual.row(i)).cwiseAbs().sum() / cap[static_cast<std::size_t>(i)];
    }
    return 100.0 * sum / static_cast<double>(actual.size());
}

/// Mean over steps of |Σᵢ ẑ − Σᵢ z| / Σᵢ capacity, in percent.
inline double nmae_ssum(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& forecast, const CapacityVector& cap) {
    const Eigen::RowVectorXd diff = (forecast - actual).colwise().sum();
    return 100.0 * diff.cwiseAbs().mean() / cap.total();
}

/// Mean squared cell error (the origin-decomposable part of RMSE_ind).
inline double mse_ind(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& forecast) {
    return (forecast - actual).squaredNorm() / static_cast<double>(actual.size());
}

inline double mse_ssum(const Eigen::MatrixXd& actual, const Eigen::MatrixXd& forecast) {
    const Eigen::RowVectorXd diff = (forecast - actual).colwise().sum();
    return diff.squaredNorm() / static_cast<double>(diff.size());
}

/// Energy distance estimator between sample sets of equal-dimension vectors:
/// (2/nm)ΣΣ‖x−y‖ − (1/n²)ΣΣ‖x−x′‖ − (1/m²)ΣΣ‖y−y′‖.
inline double energy_distance(std::span<const Eigen::VectorXd> x, std::span<const Eigen::VectorXd> y) {
    if (x.empty() || y.empty()) throw Error(ErrorCode::NoScenarios, "energy distance needs non-empty sample sets");
    const auto dim = x.front().size();
    for (const auto& v : x)
        if (v.size() != dim) throw Error(ErrorCode::DimensionMismatch, "sample dimensions differ");
    for (const auto& v : y)
        if (v.size() != dim) throw Error(ErrorCode::DimensionMismatch, "sample dimensions differ");
    const double n = static_cast<double>(x.size()), m = static_cast<double>(y.size());
    double cross = 0.0, xx = 0.0, yy = 0.0;
    for (const auto& a : x)
        for (const auto& b : y) cross += (a - b).norm();
    for (std::size_t i = 0; i < x.size(); ++i)
        for (std::size_t j = i + 1; j < x.size(); ++j) xx += (x[i] - x[j]).norm();
    for (std::size_t i = 0; i < y.size(); ++i)
        for (std::size_t j = i + 1; j < y.size(); ++j) yy += (y[i] - y[j]).norm();
    return 2.0 * cross / (n * m) - 2.0 * xx / (n * n) - 2.0 * yy / (m * m);
}

/// Energy score of an ensemble of D×H matrices against one realization, with
/// Frobenius norms taken directly on the matrices.
inline double energy_score(const std::vector<Eigen::MatrixXd>& scenarios, const Eigen::MatrixXd& actual) {
    if (scenarios.empty()) throw Error(ErrorCode::NoScenarios, "energy score needs at least one scenario");
    const double S = static_cast<double>(scenarios.size());
    double cross = 0.0, self = 0.0;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        cross += (scenarios[s] - actual).norm();
        for (std::size_t r = s + 1; r < scenarios.size(); ++r) self += (scenarios[s] - scenarios[r]).norm();
    }
    return 2.0 * cross / S - 2.0 * self / (S * S);
}

/// ED_ind at one origin.
inline double ed_ind(const Eigen::MatrixXd& actual, const std::vector<Eigen::MatrixXd>& scenarios) {
    return energy_score(scenarios, actual);
}

/// ED_s-sum at one origin: the same estimator on space-summed H-vectors.
inline double ed_ssum(const Eigen::MatrixXd& actual, const std::vector<Eigen::MatrixXd>& scenarios) {
    std::vector<Eigen::MatrixXd> sums;
    sums.reserve(scenarios.size());
    for (const auto& s : scenarios) sums.emplace_back(s.colwise().sum());
    return energy_score(sums, actual.colwise().sum());
}

/// How the observed and ensemble variogram terms are combined per pair.
///  - Squared: (|Δobs|^p − mean_s |Δscen|^p)², the proper variogram score.
///  - Signed: |Δobs|^p − mean_s |Δscen|^p with no outer square, which can go
///    negative and rewards over-dispersed ensembles.
enum class VariogramForm { Squared, Signed };

inline std::string_view to_string(VariogramForm f) { return f == VariogramForm::Squared ? "squared" : "signed"; }

inline VariogramForm parse_variogram_form(std::string_view text) {
    if (text == "squared") return VariogramForm::Squared;
    if (text == "signed") return VariogramForm::Signed;
    throw Error(ErrorCode::ConfigError, "unknown variogram form '" + std::string(text) + "'");
}

/// Variogram score over the unordered pairs (a < b) of the entries of a
/// K-vector: `obs` is the realization, `ens` is S×K.
inline double variogram_pairs(const Eigen::RowVectorXd& obs, const Eigen::MatrixXd& ens, double p, VariogramForm form) {
    const auto K = obs.size();
    const double S = static_cast<double>(ens.rows());
    double score = 0.0;
    for (Eigen::Index a = 0; a < K; ++a) {
        for (Eigen::Index b = a + 1; b < K; ++b) {
            const double o = std::pow(std::fabs(obs(a) - obs(b)), p);
            const double e = (ens.col(a) - ens.col(b)).array().abs().pow(p).sum() / S;
            const double diff = o - e;
            score += form == VariogramForm::Squared ? diff * diff : diff;
        }
    }
    return score;
}

/// VS_s-sum at one origin: pairs of lead times of the space-summed series.
inline double variogram_ssum(const Eigen::MatrixXd& actual, const std::vector<Eigen::MatrixXd>& scenarios,
                             double p = 0.5, VariogramForm form = VariogramForm::Squared) {
    if (scenarios.empty()) throw Error(ErrorCode::NoScenarios, "variogram score needs at least one scenario");
    if (!(p > 0.0)) throw Error(ErrorCode::ConfigError, "variogram order p must be positive");
    Eigen::MatrixXd ens(static_cast<Eigen::Index>(scenarios.size()), actual.cols());
    for (std::size_t s = 0; s < scenarios.size(); ++s) ens.row(static_cast<Eigen::Index>(s)) = scenarios[s].colwise().sum();
    return variogram_pairs(actual.colwise().sum(), ens, p, form);
}

/// VS_t-sum at one origin: pairs of locations of the horizon-summed series.
inline double variogram_tsum(const Eigen::MatrixXd& actual, const std::vector<Eigen::MatrixXd>& scenarios,
                             double p = 0.5, VariogramForm form = VariogramForm::Squared) {
    if (scenarios.empty()) throw Error(ErrorCode::NoScenarios, "variogram score needs at least one scenario");
    if (!(p > 0.0)) throw Error(ErrorCode::ConfigError, "variogram order p must be positive");
    Eigen::MatrixXd ens(static_cast<Eigen::Index>(scenarios.size()), actual.rows());
    for (std::size_t s = 0; s < scenarios.size(); ++s)
        ens.row(static_cast<Eigen::Index>(s)) = scenarios[s].rowwise().sum().transpose();
    return variogram_pairs(actual.rowwise().sum().transpose(), ens, p, form);
}

// ---------------------------------------------------------------------------
// Batch metrics and reports

enum class Metric { NmaeInd, NmaeSsum, RmseInd, RmseSsum, EdInd, EdSsum, VsSsum, VsTsum };

inline constexpr Metric kAllMetrics[] = {Metric::NmaeInd, Metric::NmaeSsum, Metric::RmseInd, Metric::RmseSsum,
                                         Metric::EdInd,   Metric::EdSsum,   Metric::VsSsum,  Metric::VsTsum};

struct MetricName {
    std::string_view metric;
    std::string_view level;
};

inline MetricName name_of(Metric m) {
    switch (m) {
        case Metric::NmaeInd: return {"nmae", "ind"};
        case Metric::NmaeSsum: return {"nmae", "s-sum"};
        case Metric::RmseInd: return {"rmse", "ind"};
        case Metric::RmseSsum: return {"rmse", "s-sum"};
        case Metric::EdInd: return {"ed", "ind"};
        case Metric::EdSsum: return {"ed", "s-sum"};
        case Metric::VsSsum: return {"vs", "s-sum"};
        case Metric::VsTsum: return {"vs", "t-sum"};
    }
    return {"?", "?"};
}

/// Parses "nmae_ind", "vs_ssum", ... (the CLI/config spelling).
inline Metric parse_metric(std::string_view text) {
    for (Metric m : kAllMetrics) {
        const auto n = name_of(m);
        std::string key = std::string(n.metric) + "_" + (n.level == "ind" ? "ind" : n.level == "s-sum" ? "ssum" : "tsum");
        if (key == text) return m;
    }
    throw Error(ErrorCode::ConfigError, "unknown metric '" + std::string(text) + "'");
}

inline bool needs_scenarios(Metric m) { return m >= Metric::EdInd; }

struct ScoreOptions {
    double variogram_p = 0.5;
    VariogramForm variogram_form = VariogramForm::Squared;
    unsigned threads = 1;
};

/// Aggregates plus the per-origin table they were averaged from. RMSE rows
/// hold the root of the mean per-origin squared error; the per-origin column
/// for RMSE holds that origin's mean squared error.
struct ScoreReport {
    std::vector<Metric> metrics;
    std::vector<double> values;                  ///< aligned with metrics
    std::vector<std::size_t> origins;            ///< sorted
    std::vector<std::vector<double>> per_origin; ///< [metric][origin]
    std::size_t series = 0, horizon = 0, scenarios = 0;
    std::size_t negative_variogram = 0;          ///< per-origin VS values below zero

    std::optional<double> value(Metric m) const {
        for (std::size_t k = 0; k < metrics.size(); ++k)
            if (metrics[k] == m) return values[k];
        return std::nullopt;
    }
};

namespace detail {

inline double origin_value(Metric m, const EvaluationEntry& e, const CapacityVector& cap, const ScoreOptions& opt) {
    switch (m) {
        case Metric::NmaeInd: return nmae_ind(e.actual, forecast_of(e), cap);
        case Metric::NmaeSsum: return nmae_ssum(e.actual, forecast_of(e), cap);
        case Metric::RmseInd: return mse_ind(e.actual, forecast_of(e));
        case Metric::RmseSsum: return mse_ssum(e.actual, forecast_of(e));
        case Metric::EdInd: return ed_ind(e.actual, scenarios_of(e, 2));
        case Metric::EdSsum: return ed_ssum(e.actual, scenarios_of(e, 2));
        case Metric::VsSsum: return variogram_ssum(e.actual, scenarios_of(e), opt.variogram_p, opt.variogram_form);
        case Metric::VsTsum: return variogram_tsum(e.actual, scenarios_of(e), opt.variogram_p, opt.variogram_form);
    }
    return 0.0;
}

}  // namespace detail

/// Scores the requested metrics. Origins are processed in ascending order;
/// errors carry the metric and origin.
inline ScoreReport score_report(const EvaluationBatch& batch, std::span<const Metric> which,
                                const ScoreOptions& opt = {}) {
    batch.validate();
    std::vector<std::size_t> order(batch.entries.size());
    for (std::size_t k = 0; k < order.size(); ++k) order[k] = k;
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return batch.entries[a].origin < batch.entries[b].origin; });

    ScoreReport rep;
    rep.series = batch.series();
    rep.horizon = batch.horizon();
    for (const auto& e : batch.entries) rep.scenarios = std::max(rep.scenarios, e.scenarios.size());
    for (std::size_t k : order) rep.origins.push_back(batch.entries[k].origin);

    for (Metric m : which) {
        std::vector<double> col(order.size());
        std::vector<std::optional<Error>> failure(order.size());
        parallel_for(order.size(), opt.threads, [&](std::size_t k) {
            try {
                col[k] = detail::origin_value(m, batch.entries[order[k]], batch.capacities, opt);
            } catch (const Error& err) {
                failure[k] = err;
            }
        });
        for (std::size_t k = 0; k < order.size(); ++k) {
            if (failure[k]) {
                const auto n = name_of(m);
                throw Error(failure[k]->code(), std::string(n.metric) + " (" + std::string(n.level) + "): " +
                                                    failure[k]->what());
            }
        }
        double mean = 0.0;
        for (double v : col) mean += v;
        mean = col.empty() ? 0.0 : mean / static_cast<double>(col.size());
        if (m == Metric::RmseInd || m == Metric::RmseSsum) mean = std::sqrt(mean);
        if (m == Metric::VsSsum || m == Metric::VsTsum) {
            rep.negative_variogram += static_cast<std::size_t>(std::count_if(col.begin(), col.end(), [](double v) { return v < 0.0; }));
        }
        rep.metrics.push_back(m);
        rep.values.push_back(mean);
        rep.per_origin.push_back(std::move(col));
    }
    return rep;
}

inline ScoreReport score_report(const EvaluationBatch& batch, std::initializer_list<Metric> which,
                                const ScoreOptions& opt = {}) {
    return score_report(batch, std::span<const Metric>(which.begin(), which.size()), opt);
}

/// Concatenates reports over disjoint origin sets (e.g. backtest splits, each
/// scored with its own capacities) and recomputes the aggregates.
inline ScoreReport merge_reports(const std::vector<ScoreReport>& parts) {
    if (parts.empty()) throw Error(ErrorCode::NoScenarios, "no reports to merge");
    ScoreReport out;
    out.metrics = parts.front().metrics;
    out.series = parts.front().series;
    out.horizon = parts.front().horizon;
    out.per_origin.resize(out.metrics.size());
    for (const auto& p : parts) {
        if (p.metrics != out.metrics) throw Error(ErrorCode::DimensionMismatch, "reports cover different metrics");
        out.scenarios = std::max(out.scenarios, p.scenarios);
        out.negative_variogram += p.negative_variogram;
        out.origins.insert(out.origins.end(), p.origins.begin(), p.origins.end());
        for (std::size_t k = 0; k < p.metrics.size(); ++k)
            out.per_origin[k].insert(out.per_origin[k].end(), p.per_origin[k].begin(), p.per_origin[k].end());
    }
    for (std::size_t k = 0; k < out.metrics.size(); ++k) {
        double mean = 0.0;
        for (double v : out.per_origin[k]) mean += v;
        mean = out.per_origin[k].empty() ? 0.0 : mean / static_cast<double>(out.per_origin[k].size());
        const bool root = out.metrics[k] == Metric::RmseInd || out.metrics[k] == Metric::RmseSsum;
        out.values.push_back(root ? std::sqrt(mean) : mean);
    }
    return out;
}

/// Batch-level wrappers: mean over origins (RMSE: root of the mean square).
inline double nmae_ind(const EvaluationBatch& b) { return *score_report(b, {Metric::NmaeInd}).value(Metric::NmaeInd); }
inline double nmae_ssum(const EvaluationBatch& b) { return *score_report(b, {Metric::NmaeSsum}).value(Metric::NmaeSsum); }
inline double rmse_ind(const EvaluationBatch& b) { return *score_report(b, {Metric::RmseInd}).value(Metric::RmseInd); }
inline double rmse_ssum(const EvaluationBatch& b) { return *score_report(b, {Metric::RmseSsum}).value(Metric::RmseSsum); }
inline double ed_ind(const EvaluationBatch& b) { return *score_report(b, {Metric::EdInd}).value(Metric::EdInd); }
inline double ed_ssum(const EvaluationBatch& b) { return *score_report(b, {Metric::EdSsum}).value(Metric::EdSsum); }
inline double variogram_ssum(const EvaluationBatch& b, double p = 0.5, VariogramForm form = VariogramForm::Squared) {
    ScoreOptions opt;
    opt.variogram_p = p;
    opt.variogram_form = form;
    return *score_report(b, {Metric::VsSsum}, opt).value(Metric::VsSsum);
}
inline double variogram_tsum(const EvaluationBatch& b, double p = 0.5, VariogramForm form = VariogramForm::Squared) {
    ScoreOptions opt;
    opt.variogram_p = p;
    opt.variogram_form = form;
    return *score_report(b, {Metric::VsTsum}, opt).value(Metric::VsTsum);
}

/// Mean absolute error per lead time over origins and locations, in MW.
inline std::vector<double> lead_time_mae(const EvaluationBatch& batch) {
    batch.validate();
    std::vector<double> out(batch.horizon(), 0.0);
    std::size_t count = 0;
    for (const auto& e : batch.entries) {
        const Eigen::RowVectorXd col = (detail::forecast_of(e) - e.actual).cwiseAbs().colwise().sum();
        for (std::size_t h = 0; h < out.size(); ++h) out[h] += col(static_cast<Eigen::Index>(h));
        count += batch.series();
    }
    for (double& v : out) v = count ? v / static_cast<double>(count) : 0.0;
    return out;
}

// ---------------------------------------------------------------------------
// Exports

inline nlohmann::json report_json(const ScoreReport& r, const ScoreOptions& opt = {}) {
    nlohmann::json j;
    j["counts"] = {{"n_origins", r.origins.size()}, {"D", r.series}, {"H", r.horizon}, {"S", r.scenarios}};
    j["variogram"] = {{"p", opt.variogram_p}, {"form", to_string(opt.variogram_form)},
                      {"negative_values", r.negative_variogram}};
    nlohmann::json metrics = nlohmann::json::object();
    for (std::size_t k = 0; k < r.metrics.size(); ++k) {
        const auto n = name_of(r.metrics[k]);
        metrics[std::string(n.metric)][std::string(n.level)] = r.values[k];
    }
    j["metrics"] = metrics;
    nlohmann::json rows = nlohmann::json::array();
    for (std::size_t o = 0; o < r.origins.size(); ++o) {
        nlohmann::json row = {{"origin", r.origins[o]}};
        for (std::size_t k = 0; k < r.metrics.size(); ++k) {
            const auto n = name_of(r.metrics[k]);
            const bool squared = r.metrics[k] == Metric::RmseInd || r.metrics[k] == Metric::RmseSsum;
            row[std::string(squared ? "mse" : n.metric) + "_" + std::string(n.level)] = r.per_origin[k][o];
        }
        rows.push_back(std::move(row));
    }
    j["per_origin"] = std::move(rows);
    return j;
}

/// Flat CSV `metric,level,value,n_origins,S`. `tag` (e.g. a scenario mode)
/// is prepended to the metric name when non-empty.
inline void write_report_csv(std::ostream& out, const ScoreReport& r, std::string_view tag = {}, bool header = true) {
    if (header) out << "metric,level,value,n_origins,S\n";
    for (std::size_t k = 0; k < r.metrics.size(); ++k) {
        const auto n = name_of(r.metrics[k]);
        out << (tag.empty() ? std::string(n.metric) : std::string(tag) + ":" + std::string(n.metric)) << ','
            << n.level << ',' << detail::format_double(r.values[k]) << ',' << r.origins.size() << ',' << r.scenarios
            << '\n';
    }
}

inline void write_lead_time_csv(const std::string& path, const std::vector<double>& mae) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write " + path);
    out << "step,mae_mw\n";
    for (std::size_t h = 0; h < mae.size(); ++h) out << h + 1 << ',' << detail::format_double(mae[h]) << '\n';
}

}  // namespace scengen
