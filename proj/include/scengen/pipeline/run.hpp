#pragma once

#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <map>
#include <string>
#include <vector>

#include "scengen/copula/io.hpp"
#include "scengen/errors.hpp"
#include "scengen/marginals/serialize.hpp"
#include "scengen/metrics.hpp"
#include "scengen/pipeline/config.hpp"
#include "scengen/pipeline/split.hpp"
#include "scengen/pipeline/stages.hpp"
#include "scengen/pipeline/synthetic.hpp"

namespace scengen {

// Artifact file names inside run.output_dir.
namespace artifact {
inline constexpr const char* kResolvedConfig = "config.resolved.ini";
inline constexpr const char* kModel = "model.json";
inline constexpr const char* kCorrelation = "correlation.bin";
inline constexpr const char* kCorrelationMeta = "correlation.json";
inline constexpr const char* kQuantiles = "quantiles.csv";
inline constexpr const char* kScenarioMeta = "scenarios.json";
inline constexpr const char* kScores = "scores.json";
inline constexpr const char* kLeadTime = "lead_time.csv";
inline constexpr const char* kTruth = "synthetic_truth.json";

inline std::string scenario_bin(ScenarioMode m) { return "scenarios_" + std::string(to_string(m)) + ".bin"; }
inline std::string scenario_csv(ScenarioMode m) { return "scenarios_" + std::string(to_string(m)) + ".csv"; }
inline std::string score_csv(ScenarioMode m) { return "scores_" + std::string(to_string(m)) + ".csv"; }
}  // namespace artifact

namespace detail {

inline std::string out_path(const RunConfig& c, const std::string& name) {
    std::filesystem::create_directories(c.output_dir);
    return (std::filesystem::path(c.output_dir) / name).string();
}

inline void require_artifact(const std::string& path, const char* stage) {
    if (!std::filesystem::exists(path)) {
        throw Error(ErrorCode::StaleArtifact, path + " is missing; run '" + std::string(stage) + "' first");
    }
}

inline void check_lineage(const nlohmann::json& meta, const char* key, std::uint64_t expected, const std::string& what) {
    const auto got = parse_hex(meta.at("lineage").at(key).get<std::string>());
    if (got != expected) {
        throw Error(ErrorCode::StaleArtifact, what + " was produced under a different configuration or input (" +
                                                  std::string(key) + " hash " + hex(got) + ", current " + hex(expected) +
                                                  ")");
    }
}

inline void check_format(const nlohmann::json& meta, const std::string& what) {
    if (!meta.contains("format_version") || meta.at("format_version").get<int>() != kArtifactFormat) {
        throw Error(ErrorCode::VersionMismatch, what + " has an unsupported format version");
    }
}

/// Model artifact: the model plus the data-side context every later stage needs.
struct ModelArtifact {
    LinearQuantileModel model;
    std::vector<std::string> location_ids;
    CapacityVector capacity;
    SplitTriple split;
    std::uint64_t fit_hash = 0;
};

inline ModelArtifact load_model_artifact(const RunConfig& c, const Lineage& expected, const InputData& in) {
    const auto path = out_path(c, artifact::kModel);
    require_artifact(path, "fit");
    const auto j = read_json(path);
    check_format(j, path);
    ModelArtifact a;
    a.model = model_from_json(j.at("model"));
    const auto& s = a.model.shape();
    if (s.past != c.window.past || s.horizon != c.window.horizon || !(a.model.levels() == c.levels) ||
        s.series != in.targets.rows()) {
        throw Error(ErrorCode::VersionMismatch, path + ": model shape (D=" + std::to_string(s.series) + ", W=" +
                                                    std::to_string(s.past) + ", H=" + std::to_string(s.horizon) +
                                                    ") does not match the configuration");
    }
    check_lineage(j, "fit", expected.fit, path);
    a.location_ids = j.at("location_ids").get<std::vector<std::string>>();
    a.capacity = CapacityVector(j.at("capacities").get<std::vector<double>>());
    const auto& sp = j.at("split");
    auto range = [](const nlohmann::json& r) { return IndexRange{r.at(0).get<std::size_t>(), r.at(1).get<std::size_t>()}; };
    a.split = {range(sp.at("train")), range(sp.at("validation")), range(sp.at("test")), {}};
    a.fit_hash = expected.fit;
    return a;
}

inline PreparedSplit prepared_from(const InputData& in, const ModelArtifact& a) {
    PreparedSplit p;
    p.split = a.split;
    p.capacity = a.capacity;
    auto norm = normalize(in.targets, a.capacity);
    p.normalized = std::move(norm.panel);
    p.clamped = norm.clamped;
    return p;
}

inline SplitTriple selected_split(const InputData& in, const RunConfig& c) {
    const auto plan = make_split_plan(in.targets.timestamps(), c.split, c.window);
    if (c.split_index >= plan.splits.size()) {
        throw Error(ErrorCode::ConfigError, "run.split_index " + std::to_string(c.split_index) + " but the plan has " +
                                                std::to_string(plan.splits.size()) + " splits");
    }
    return plan.splits[c.split_index];
}

inline nlohmann::json range_json(const IndexRange& r) { return nlohmann::json::array({r.begin, r.end}); }

}  // namespace detail

/// Writes the canonical configuration (all defaults filled in) and returns it.
inline std::string echo_config(const RunConfig& c) {
    const auto text = c.source.to_text();
    detail::write_text(detail::out_path(c, artifact::kResolvedConfig), text);
    return text;
}

/// `synth`: writes the target (and covariate) CSV at the configured paths plus
/// the generating parameters.
inline SyntheticData run_synth(const RunConfig& c) {
    if (c.targets_path.empty()) throw Error(ErrorCode::ConfigError, "data.targets: synth needs an output path");
    auto data = generate_synthetic(SyntheticSpec::from(c.synth, derive_seed(c.require_seed(), "synth")));
    for (const auto& p : {c.targets_path, c.covariates_path}) {
        if (const auto dir = std::filesystem::path(p).parent_path(); !p.empty() && !dir.empty()) {
            std::filesystem::create_directories(dir);
        }
    }
    write_panel_csv(c.targets_path, data.targets);
    if (!c.covariates_path.empty()) write_panel_csv(c.covariates_path, data.covariates);
    const auto& s = data.truth.spec;
    nlohmann::json truth = {{"format_version", kArtifactFormat}, {"series", s.series}, {"length", s.length},
                            {"phi", s.phi}, {"rho", s.rho}, {"sigma", s.sigma}, {"level", s.level},
                            {"diurnal", s.diurnal}, {"diurnal_phase", data.truth.phase}, {"seed", s.seed}};
    detail::write_text(detail::out_path(c, artifact::kTruth), truth.dump(2) + "\n");
    return data;
}

/// `fit`: trains on the selected split and writes model.json.
inline FitOutcome run_fit(const RunConfig& c) {
    c.require_seed();
    const auto in = load_inputs(c);
    const auto lineage = lineage_of(c, in.content_hash);
    const auto split = detail::selected_split(in, c);
    const auto prep = prepare_split(in, split);
    auto fit = fit_model(in, prep, c, c.variant);
    nlohmann::json j = {
        {"format_version", kArtifactFormat},
        {"lineage", {{"fit", detail::hex(lineage.fit)}}},
        {"model", model_to_json(fit.model)},
        {"location_ids", in.targets.ids()},
        {"capacities", prep.capacity.values()},
        {"clamped_capacity_factors", prep.clamped},
        {"split", {{"index", c.split_index}, {"train", detail::range_json(split.train)},
                   {"validation", detail::range_json(split.validation)}, {"test", detail::range_json(split.test)}}},
        {"training", {{"windows", fit.training_windows}, {"epochs", c.train.epochs},
                      {"learning_rate", c.train.learning_rate},
                      {"lr_schedule", to_string(c.train.schedule)}, {"batch_size", c.train.batch_size},
                      {"initial_loss", fit.report.initial_loss()}, {"final_loss", fit.report.final_loss()},
                      {"best_epoch", fit.report.best_epoch},
                      {"validation_pinball", std::isfinite(fit.validation_pinball) ? nlohmann::json(fit.validation_pinball)
                                                                                    : nlohmann::json(nullptr)}}}};
    detail::write_text(detail::out_path(c, artifact::kModel), j.dump(1) + "\n");
    return fit;
}

/// `copula`: PIT + correlation on the training windows of the fitted model.
inline GaussianCopula run_copula(const RunConfig& c) {
    const auto in = load_inputs(c);
    const auto lineage = lineage_of(c, in.content_hash);
    const auto a = detail::load_model_artifact(c, lineage, in);
    const auto prep = detail::prepared_from(in, a);
    auto copula = fit_copula(a.model, in, prep, c);
    write_correlation_binary(detail::out_path(c, artifact::kCorrelation), copula.correlation().values);
    auto meta = correlation_metadata(copula);
    meta["format_version"] = kArtifactFormat;
    meta["binary_format_version"] = kCorrelationFormat;
    meta["series"] = a.model.shape().series;
    meta["horizon"] = a.model.shape().horizon;
    meta["lineage"] = {{"fit", detail::hex(lineage.fit)}, {"copula", detail::hex(lineage.copula)}};
    detail::write_text(detail::out_path(c, artifact::kCorrelationMeta), meta.dump(2) + "\n");
    return copula;
}

/// `scenarios`: both modes for every test origin of the selected split.
inline std::vector<ScenarioSet> run_scenarios(const RunConfig& c) {
    const auto root = c.require_seed();
    const auto in = load_inputs(c);
    const auto lineage = lineage_of(c, in.content_hash);
    const auto a = detail::load_model_artifact(c, lineage, in);

    const auto meta_path = detail::out_path(c, artifact::kCorrelationMeta);
    detail::require_artifact(meta_path, "copula");
    const auto meta = detail::read_json(meta_path);
    detail::check_format(meta, meta_path);
    const auto D = a.model.shape().series, H = a.model.shape().horizon;
    if (meta.at("series").get<std::size_t>() != D || meta.at("horizon").get<std::size_t>() != H) {
        throw Error(ErrorCode::VersionMismatch, meta_path + ": copula was estimated for D=" + meta.at("series").dump() +
                                                    ", H=" + meta.at("horizon").dump() + " but the model has D=" +
                                                    std::to_string(D) + ", H=" + std::to_string(H));
    }
    detail::check_lineage(meta, "fit", lineage.fit, meta_path);
    detail::check_lineage(meta, "copula", lineage.copula, meta_path);
    auto r = read_correlation_binary(detail::out_path(c, artifact::kCorrelation));
    if (static_cast<std::size_t>(r.rows()) != D * H) {
        throw Error(ErrorCode::VersionMismatch, "correlation matrix has dimension " + std::to_string(r.rows()) +
                                                    ", expected " + std::to_string(D * H));
    }
    const auto copula = make_copula(correlation_from(std::move(r)));

    const auto prep = detail::prepared_from(in, a);
    const auto range = test_origins(a.split.test, c.window);
    if (!range) throw Error(ErrorCode::InsufficientData, "test range cannot hold one forecast");
    const auto f = forecast_origins(a.model, in, prep, c, *range, c.split.eval_stride);
    write_quantiles_csv(detail::out_path(c, artifact::kQuantiles), f.origins, f.quantiles, c.levels, a.location_ids,
                        a.capacity.values());

    std::vector<ScenarioSet> all;
    for (auto mode : {ScenarioMode::MarginalOnly, ScenarioMode::Copula}) {
        auto sets = make_scenarios(f, mode == ScenarioMode::Copula ? &copula : nullptr, c.scenarios, root, c.threads);
        write_scenarios_binary(detail::out_path(c, artifact::scenario_bin(mode)), sets, lineage.scenarios);
        write_scenarios_csv(detail::out_path(c, artifact::scenario_csv(mode)), sets, a.location_ids);
        all.insert(all.end(), std::make_move_iterator(sets.begin()), std::make_move_iterator(sets.end()));
    }
    nlohmann::json j = {{"format_version", kArtifactFormat},
                        {"lineage", {{"fit", detail::hex(lineage.fit)}, {"copula", detail::hex(lineage.copula)},
                                     {"scenarios", detail::hex(lineage.scenarios)}}},
                        {"series", D},
                        {"horizon", H},
                        {"scenarios", c.scenarios},
                        {"origins", f.origins},
                        {"quantiles", artifact::kQuantiles},
                        {"files", {{"marginal", artifact::scenario_bin(ScenarioMode::MarginalOnly)},
                                   {"copula", artifact::scenario_bin(ScenarioMode::Copula)}}}};
    detail::write_text(detail::out_path(c, artifact::kScenarioMeta), j.dump(2) + "\n");
    return all;
}

/// Reads quantiles.csv back into per-origin D×H point forecasts (MW) using
/// the level nearest to the median.
inline std::map<std::size_t, Eigen::MatrixXd> read_point_forecasts(const std::string& path, const QuantileSet& levels,
                                                                   const std::vector<std::string>& ids, std::size_t H) {
    const auto lines = detail::read_lines(path);
    if (lines.empty()) throw Error(ErrorCode::MissingForecast, path + " is empty");
    const auto header = detail::split_csv_line(lines.front());
    const std::string want = QuantileSet::label(levels[median_index(levels)]);
    std::size_t col = 0;
    for (std::size_t k = 3; k < header.size(); ++k)
        if (detail::trim(header[k]) == want) col = k;
    if (col == 0) throw Error(ErrorCode::MissingColumn, path + ": no column '" + want + "'");
    std::map<std::string, std::size_t> loc;
    for (std::size_t i = 0; i < ids.size(); ++i) loc[ids[i]] = i;
    std::map<std::size_t, Eigen::MatrixXd> out;
    for (std::size_t li = 1; li < lines.size(); ++li) {
        const auto cells = detail::split_csv_line(lines[li]);
        if (cells.size() != header.size()) throw Error(ErrorCode::MissingColumn, path + ": row " + std::to_string(li + 1));
        const auto origin = detail::parse_double(cells[0]);
        const auto step = detail::parse_double(cells[2]);
        const auto value = detail::parse_double(cells[col]);
        const auto it = loc.find(std::string(detail::trim(cells[1])));
        if (!origin || !step || !value || it == loc.end() || *step < 1 || *step > static_cast<double>(H)) {
            throw Error(ErrorCode::NonNumericCell, path + ": malformed row " + std::to_string(li + 1));
        }
        auto [pos, fresh] = out.try_emplace(static_cast<std::size_t>(*origin));
        if (fresh) pos->second = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(H),
                                                           std::numeric_limits<double>::quiet_NaN());
        pos->second(static_cast<Eigen::Index>(it->second), static_cast<Eigen::Index>(*step - 1)) = *value;
    }
    return out;
}

struct ScoreOutcome {
    ScoreReport marginal, copula;
};

/// `score`: scores both scenario files against the realized targets.
inline ScoreOutcome run_score(const RunConfig& c) {
    const auto in = load_inputs(c);
    const auto lineage = lineage_of(c, in.content_hash);
    const auto a = detail::load_model_artifact(c, lineage, in);
    const auto meta_path = detail::out_path(c, artifact::kScenarioMeta);
    detail::require_artifact(meta_path, "scenarios");
    const auto meta = detail::read_json(meta_path);
    detail::check_format(meta, meta_path);
    detail::check_lineage(meta, "fit", lineage.fit, meta_path);
    detail::check_lineage(meta, "copula", lineage.copula, meta_path);
    detail::check_lineage(meta, "scenarios", lineage.scenarios, meta_path);

    const auto D = a.model.shape().series, H = a.model.shape().horizon;
    const auto forecasts = read_point_forecasts(detail::out_path(c, artifact::kQuantiles), c.levels, a.location_ids, H);

    ScoreOutcome result;
    nlohmann::json report = {{"format_version", kArtifactFormat},
                             {"lineage", meta.at("lineage")}};
    std::vector<double> lead;
    for (auto mode : {ScenarioMode::MarginalOnly, ScenarioMode::Copula}) {
        const auto file = read_scenarios_binary(detail::out_path(c, artifact::scenario_bin(mode)));
        if (file.lineage != lineage.scenarios) {
            throw Error(ErrorCode::StaleArtifact, artifact::scenario_bin(mode) + " belongs to a different run (mixed lineage)");
        }
        EvaluationBatch batch;
        batch.capacities = a.capacity;
        for (const auto& set : file.sets) {
            if (set.series != D || set.horizon != H || set.mode != mode) {
                throw Error(ErrorCode::VersionMismatch, artifact::scenario_bin(mode) + ": unexpected scenario set shape");
            }
            const auto fc = forecasts.find(set.origin);
            if (fc == forecasts.end() || !fc->second.allFinite()) {
                throw Error(ErrorCode::MissingForecast, "no complete point forecast for origin " + std::to_string(set.origin));
            }
            EvaluationEntry e;
            e.origin = set.origin;
            e.actual = in.targets.values().middleCols(static_cast<Eigen::Index>(set.origin), static_cast<Eigen::Index>(H));
            e.forecast = fc->second;
            e.scenarios = set.scenarios;
            batch.entries.push_back(std::move(e));
        }
        auto rep = score_report(batch, c.metrics, c.score);
        std::ofstream csv(detail::out_path(c, artifact::score_csv(mode)), std::ios::binary);
        write_report_csv(csv, rep);
        report[std::string(to_string(mode))] = report_json(rep, c.score);
        if (mode == ScenarioMode::Copula) {
            lead = lead_time_mae(batch);
            result.copula = std::move(rep);
        } else {
            result.marginal = std::move(rep);
        }
    }
    write_lead_time_csv(detail::out_path(c, artifact::kLeadTime), lead);
    detail::write_text(detail::out_path(c, artifact::kScores), report.dump(2) + "\n");
    return result;
}

/// Writes each split's scenario binaries as backtest_<variant>_<mode>_split<k>.bin.
class BacktestFileSink : public BacktestSink {
public:
    BacktestFileSink(const RunConfig& c, std::uint64_t lineage) : config_(c), lineage_(lineage) {}
    void scenarios(std::size_t split, LinearVariant v, ScenarioMode m, const std::vector<ScenarioSet>& sets) override {
        const std::string name = "backtest_" + std::string(to_string(v)) + "_" + std::string(to_string(m)) + "_split" +
                                 std::to_string(split) + ".bin";
        write_scenarios_binary(detail::out_path(config_, name), sets, lineage_);
    }

private:
    const RunConfig& config_;
    std::uint64_t lineage_;
};

/// `backtest`: every split, every configured variant, both scenario modes.
/// Writes per-cell score CSVs and a comparison table (one row per variant,
/// marginal/copula column pairs for the ensemble metrics).
inline BacktestResult run_backtest(const RunConfig& c) {
    const auto in = load_inputs(c);
    const auto lineage = lineage_of(c, in.content_hash);
    BacktestFileSink sink(c, lineage.scenarios);
    auto result = run_backtest(in, c, &sink);

    nlohmann::json all = {{"format_version", kArtifactFormat},
                          {"lineage", {{"fit", detail::hex(lineage.fit)}, {"scenarios", detail::hex(lineage.scenarios)}}},
                          {"splits", result.splits}};
    for (const auto& cell : result.cells) {
        const std::string tag = std::string(to_string(cell.variant)) + "_" + std::string(to_string(cell.mode));
        std::ofstream csv(detail::out_path(c, "backtest_scores_" + tag + ".csv"), std::ios::binary);
        write_report_csv(csv, cell.report);
        all["results"][tag] = report_json(cell.report, c.score);
    }
    detail::write_text(detail::out_path(c, "backtest_scores.json"), all.dump(2) + "\n");

    std::ofstream table(detail::out_path(c, "backtest_table.csv"), std::ios::binary);
    table << "variant";
    for (Metric m : c.metrics) {
        const auto n = name_of(m);
        const std::string key = std::string(n.metric) + "_" + std::string(n.level);
        if (needs_scenarios(m)) table << ',' << key << "_mar," << key << "_cop";
        else table << ',' << key;
    }
    table << '\n';
    for (auto v : c.backtest_variants) {
        const auto& mar = result.report(v, ScenarioMode::MarginalOnly);
        const auto& cop = result.report(v, ScenarioMode::Copula);
        table << to_string(v);
        for (Metric m : c.metrics) {
            table << ',' << detail::format_double(*mar.value(m));
            if (needs_scenarios(m)) table << ',' << detail::format_double(*cop.value(m));
        }
        table << '\n';
    }
    return result;
}

}  // namespace scengen
