#pragma once

#include <algorithm>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "scengen/data_model.hpp"
#include "scengen/errors.hpp"
#include "scengen/marginals/cdf.hpp"
#include "scengen/marginals/linear_model.hpp"
#include "scengen/marginals/quantile_loss.hpp"
#include "scengen/metrics.hpp"
#include "scengen/random.hpp"

namespace scengen {

// Grammar (one statement per line):
//   # comment            ; comment
//   [section]
//   key = value          value runs to end of line, surrounding blanks trimmed
// Keys are addressed as section.key. Lists are comma separated. Every key has
// a default; unknown keys and sections are errors.

struct ConfigKey {
    std::string_view key;
    std::string_view fallback;
    std::string_view help;
};

inline constexpr ConfigKey kConfigSchema[] = {
    {"data.targets", "", "target panel CSV (timestamp,<id>...)"},
    {"data.covariates", "", "covariate panel CSV, hourly or coarser; empty for none"},
    {"data.capacities", "", "capacity override CSV (location_id,capacity_mw); empty for none"},
    {"data.forward_fill", "false", "fill up to 3 consecutive missing cells from the previous row"},
    {"data.time_encodings", "false", "append hour-of-day and day-of-week sin/cos covariates"},
    {"window.past", "24", "W, hours of history fed to the model"},
    {"window.horizon", "48", "H, hours forecast per origin"},
    {"model.variant", "nlinear", "nlinear | dlinear"},
    {"model.kernel", "7", "DLinear moving-average kernel (odd, <= W)"},
    {"model.use_covariates", "true", "feed covariates to the model"},
    {"model.per_series", "false", "restrict each series to its own lags"},
    {"model.epochs", "60", "training epochs"},
    {"model.learning_rate", "0.05", "gradient step"},
    {"model.lr_schedule", "cosine", "cosine | constant"},
    {"model.batch_size", "64", "mini-batch size"},
    {"model.window_stride", "1", "stride between training origins"},
    {"quantiles.levels", "0.1,0.3,0.5,0.7,0.9", "predicted quantile levels"},
    {"quantiles.tails", "extrapolate", "CDF beyond the outer levels: extrapolate | bounds"},
    {"copula.stride", "1", "stride between origins used to estimate the correlation"},
    {"copula.shrinkage", "0", "lambda in R <- (1-lambda) R + lambda I"},
    {"copula.pit_clamp", "1e-6", "PIT values are clamped to [eps, 1-eps]"},
    {"scenarios.count", "200", "S, scenarios per origin"},
    {"metrics.select", "nmae_ind,nmae_ssum,rmse_ind,rmse_ssum,ed_ind,ed_ssum,vs_ssum,vs_tsum", "metrics to report"},
    {"metrics.variogram_p", "0.5", "variogram order"},
    {"metrics.variogram_form", "squared", "squared | signed"},
    {"split.policy", "monthly", "monthly | fractional"},
    {"split.min_train_hours", "8760", "monthly: first month needs this much history"},
    {"split.validation_days", "7", "monthly: validation length"},
    {"split.test_days", "7", "monthly: test length"},
    {"split.train", "0.7", "fractional: train share"},
    {"split.validation", "0.1", "fractional: validation share"},
    {"split.test", "0.2", "fractional: test share"},
    {"split.eval_stride", "1", "hours between evaluated test origins"},
    {"run.seed", "", "root seed (required for generating commands)"},
    {"run.output_dir", "out", "artifact directory"},
    {"run.split_index", "0", "split used by fit/copula/scenarios/score"},
    {"run.threads", "0", "worker threads, 0 = all cores"},
    {"backtest.variants", "", "model variants compared by backtest; empty = model.variant"},
    {"backtest.max_splits", "0", "limit on evaluated splits, 0 = all"},
    {"synth.series", "5", "D"},
    {"synth.length", "2000", "T"},
    {"synth.phi", "0.8", "AR(1) coefficient"},
    {"synth.rho", "0.5", "cross-location innovation correlation"},
    {"synth.sigma", "0.1", "innovation scale"},
    {"synth.level", "1.0", "mean level"},
    {"synth.diurnal", "0.2", "diurnal amplitude"},
    {"synth.start", "2020-01-01T00:00:00Z", "first timestamp"},
};

/// Raw key/value view of a config file with defaults filled in.
class ConfigMap {
public:
    ConfigMap() {
        for (const auto& k : kConfigSchema) values_[std::string(k.key)] = std::string(k.fallback);
    }

    static ConfigMap parse(std::string_view text, std::string_view origin = "<config>") {
        ConfigMap cfg;
        std::string section;
        std::size_t lineno = 0;
        std::istringstream in{std::string(text)};
        for (std::string raw; std::getline(in, raw);) {
            ++lineno;
            const std::string where = std::string(origin) + ":" + std::to_string(lineno);
            auto line = detail::trim(raw);
            if (line.empty() || line.front() == '#' || line.front() == ';') continue;
            if (line.front() == '[') {
                if (line.back() != ']') throw Error(ErrorCode::ConfigError, where + ": unterminated section header");
                section = std::string(detail::trim(line.substr(1, line.size() - 2)));
                const bool known = std::any_of(std::begin(kConfigSchema), std::end(kConfigSchema), [&](const ConfigKey& k) {
                    return k.key.substr(0, k.key.find('.')) == section;
                });
                if (!known) throw Error(ErrorCode::ConfigError, where + ": unknown section [" + section + "]");
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string_view::npos) throw Error(ErrorCode::ConfigError, where + ": expected key = value");
            const std::string key = std::string(detail::trim(line.substr(0, eq)));
            if (section.empty()) throw Error(ErrorCode::ConfigError, where + ": key '" + key + "' outside a section");
            cfg.set(section + "." + key, detail::trim(line.substr(eq + 1)), where);
        }
        return cfg;
    }

    static ConfigMap load(const std::string& path) {
        std::ifstream in(path);
        if (!in) throw Error(ErrorCode::ConfigError, "cannot read config file '" + path + "'");
        std::stringstream ss;
        ss << in.rdbuf();
        return parse(ss.str(), path);
    }

    void set(const std::string& key, std::string_view value, std::string_view where = "--set") {
        auto it = values_.find(key);
        if (it == values_.end()) throw Error(ErrorCode::ConfigError, std::string(where) + ": unknown key '" + key + "'");
        it->second = std::string(value);
    }

    /// Applies `section.key=value`.
    void apply_override(std::string_view assignment) {
        const auto eq = assignment.find('=');
        if (eq == std::string_view::npos) {
            throw Error(ErrorCode::ConfigError, "override '" + std::string(assignment) + "' is not key=value");
        }
        set(std::string(detail::trim(assignment.substr(0, eq))), detail::trim(assignment.substr(eq + 1)));
    }

    const std::string& raw(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end()) throw Error(ErrorCode::ConfigError, "unknown key '" + key + "'");
        return it->second;
    }

    std::string str(const std::string& key) const { return raw(key); }

    double real(const std::string& key) const {
        const auto& v = raw(key);
        double out = 0.0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size() || !std::isfinite(out)) {
            throw Error(ErrorCode::ConfigError, key + ": '" + v + "' is not a number");
        }
        return out;
    }

    std::int64_t integer(const std::string& key) const {
        const auto& v = raw(key);
        std::int64_t out = 0;
        auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
        if (ec != std::errc{} || ptr != v.data() + v.size()) {
            throw Error(ErrorCode::ConfigError, key + ": '" + v + "' is not an integer");
        }
        return out;
    }

    std::size_t count(const std::string& key, std::int64_t min) const {
        const auto v = integer(key);
        if (v < min) throw Error(ErrorCode::ConfigError, key + " must be >= " + std::to_string(min) + ", got " + std::to_string(v));
        return static_cast<std::size_t>(v);
    }

    bool boolean(const std::string& key) const {
        const auto& v = raw(key);
        if (v == "true" || v == "1" || v == "yes") return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw Error(ErrorCode::ConfigError, key + ": '" + v + "' is not a boolean");
    }

    std::vector<std::string> list(const std::string& key) const {
        std::vector<std::string> out;
        for (auto part : detail::split_csv_line(raw(key))) {
            part = detail::trim(part);
            if (!part.empty()) out.emplace_back(part);
        }
        return out;
    }

    /// Canonical text: every key, sections in schema order.
    std::string to_text(std::string_view only_section = {}) const {
        std::string out, current;
        for (const auto& k : kConfigSchema) {
            const auto dot = k.key.find('.');
            const std::string section(k.key.substr(0, dot));
            if (!only_section.empty() && section != only_section) continue;
            if (section != current) {
                out += (out.empty() ? "" : "\n") + std::string("[") + section + "]\n";
                current = section;
            }
            out += std::string(k.key.substr(dot + 1)) + " = " + values_.at(std::string(k.key)) + "\n";
        }
        return out;
    }

private:
    std::map<std::string, std::string> values_;
};

enum class SplitPolicy { Monthly, Fractional };

struct SplitSettings {
    SplitPolicy policy = SplitPolicy::Monthly;
    std::size_t min_train_hours = 8760;
    std::size_t validation_days = 7;
    std::size_t test_days = 7;
    double train = 0.7, validation = 0.1, test = 0.2;
    std::size_t eval_stride = 1;
};

struct SynthSettings {
    std::size_t series = 5;
    std::size_t length = 2000;
    double phi = 0.8, rho = 0.5, sigma = 0.1, level = 1.0, diurnal = 0.2;
    HourStamp start = 0;
};

/// Validated, typed configuration.
struct RunConfig {
    ConfigMap source;

    std::string targets_path, covariates_path, capacities_path;
    bool forward_fill = false;
    bool time_encodings = false;

    WindowSpec window;
    LinearVariant variant = LinearVariant::NLinear;
    std::size_t kernel = 7;
    bool use_covariates = true;
    TrainConfig train;
    std::size_t window_stride = 1;
    QuantileSet levels;
    TailRule tails = TailRule::Extrapolate;

    std::size_t copula_stride = 1;
    double shrinkage = 0.0;
    double pit_clamp = 1e-6;
    std::size_t scenarios = 200;

    std::vector<Metric> metrics;
    ScoreOptions score;

    SplitSettings split;
    std::optional<std::uint64_t> seed;
    std::string output_dir = "out";
    std::size_t split_index = 0;
    unsigned threads = 1;
    std::vector<LinearVariant> backtest_variants;
    std::size_t max_splits = 0;

    SynthSettings synth;

    std::uint64_t require_seed() const {
        if (!seed) throw Error(ErrorCode::ConfigError, "run.seed: a seed is required (pass --seed)");
        return *seed;
    }
};

inline RunConfig resolve_config(const ConfigMap& m) {
    RunConfig c;
    c.source = m;
    c.targets_path = m.str("data.targets");
    c.covariates_path = m.str("data.covariates");
    c.capacities_path = m.str("data.capacities");
    c.forward_fill = m.boolean("data.forward_fill");
    c.time_encodings = m.boolean("data.time_encodings");

    c.window.past = m.count("window.past", 1);
    c.window.horizon = m.count("window.horizon", 1);
    c.variant = parse_variant(m.str("model.variant"));
    c.kernel = m.count("model.kernel", 1);
    if (c.kernel % 2 == 0 || c.kernel > c.window.past) {
        throw Error(ErrorCode::ConfigError, "model.kernel must be odd and <= window.past");
    }
    c.use_covariates = m.boolean("model.use_covariates");
    c.train.per_series = m.boolean("model.per_series");
    c.train.epochs = static_cast<int>(m.count("model.epochs", 0));
    c.train.learning_rate = m.real("model.learning_rate");
    if (!(c.train.learning_rate > 0.0)) throw Error(ErrorCode::ConfigError, "model.learning_rate must be positive");
    c.train.schedule = parse_lr_schedule(m.str("model.lr_schedule"));
    c.train.batch_size = m.count("model.batch_size", 1);
    c.window_stride = m.count("model.window_stride", 1);

    std::vector<double> levels;
    for (const auto& s : m.list("quantiles.levels")) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw Error(ErrorCode::ConfigError, "quantiles.levels: '" + s + "' is not a number");
        }
        levels.push_back(v);
    }
    try {
        c.levels = QuantileSet(levels);
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, std::string("quantiles.levels: ") + e.what());
    }
    try {
        c.tails = parse_tail_rule(m.str("quantiles.tails"));
    } catch (const Error& e) {
        throw Error(ErrorCode::ConfigError, std::string("quantiles.tails: ") + e.what());
    }

    c.copula_stride = m.count("copula.stride", 1);
    c.shrinkage = m.real("copula.shrinkage");
    if (c.shrinkage < 0.0 || c.shrinkage > 1.0) throw Error(ErrorCode::ConfigError, "copula.shrinkage must be in [0, 1]");
    c.pit_clamp = m.real("copula.pit_clamp");
    if (!(c.pit_clamp > 0.0 && c.pit_clamp < 0.5)) throw Error(ErrorCode::ConfigError, "copula.pit_clamp must be in (0, 0.5)");
    c.scenarios = m.count("scenarios.count", 1);

    for (const auto& name : m.list("metrics.select")) c.metrics.push_back(parse_metric(name));
    c.score.variogram_p = m.real("metrics.variogram_p");
    if (!(c.score.variogram_p > 0.0)) throw Error(ErrorCode::ConfigError, "metrics.variogram_p must be positive");
    c.score.variogram_form = parse_variogram_form(m.str("metrics.variogram_form"));

    const auto policy = m.str("split.policy");
    if (policy == "monthly") c.split.policy = SplitPolicy::Monthly;
    else if (policy == "fractional") c.split.policy = SplitPolicy::Fractional;
    else throw Error(ErrorCode::ConfigError, "split.policy: '" + policy + "' is not monthly or fractional");
    c.split.min_train_hours = m.count("split.min_train_hours", 0);
    c.split.validation_days = m.count("split.validation_days", 0);
    c.split.test_days = m.count("split.test_days", 1);
    c.split.train = m.real("split.train");
    c.split.validation = m.real("split.validation");
    c.split.test = m.real("split.test");
    if (c.split.train <= 0.0 || c.split.validation < 0.0 || c.split.test <= 0.0 ||
        c.split.train + c.split.validation + c.split.test > 1.0 + 1e-9) {
        throw Error(ErrorCode::ConfigError, "split shares must be positive and sum to at most 1");
    }
    c.split.eval_stride = m.count("split.eval_stride", 1);

    if (const auto& s = m.raw("run.seed"); !s.empty()) {
        std::uint64_t v = 0;
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc{} || ptr != s.data() + s.size()) {
            throw Error(ErrorCode::ConfigError, "run.seed: '" + s + "' is not an unsigned integer");
        }
        c.seed = v;
        c.train.seed = derive_seed(v, "fit");
    }
    c.output_dir = m.str("run.output_dir");
    if (c.output_dir.empty()) throw Error(ErrorCode::ConfigError, "run.output_dir must not be empty");
    c.split_index = m.count("run.split_index", 0);
    const auto threads = m.count("run.threads", 0);
    c.threads = threads == 0 ? default_threads() : static_cast<unsigned>(threads);
    for (const auto& v : m.list("backtest.variants")) c.backtest_variants.push_back(parse_variant(v));
    if (c.backtest_variants.empty()) c.backtest_variants.push_back(c.variant);
    c.max_splits = m.count("backtest.max_splits", 0);

    c.synth.series = m.count("synth.series", 1);
    c.synth.length = m.count("synth.length", 2);
    c.synth.phi = m.real("synth.phi");
    c.synth.rho = m.real("synth.rho");
    c.synth.sigma = m.real("synth.sigma");
    c.synth.level = m.real("synth.level");
    c.synth.diurnal = m.real("synth.diurnal");
    const auto start = parse_iso8601_hour(m.str("synth.start"));
    if (!start) throw Error(ErrorCode::ConfigError, "synth.start: not an ISO-8601 hour");
    c.synth.start = *start;
    return c;
}

inline RunConfig parse_config(const std::string& path, const std::vector<std::string>& overrides = {}) {
    auto m = ConfigMap::load(path);
    for (const auto& o : overrides) m.apply_override(o);
    return resolve_config(m);
}

/// Checks that the input files a data-consuming stage needs are present.
inline void require_inputs(const RunConfig& c) {
    namespace fs = std::filesystem;
    if (c.targets_path.empty()) throw Error(ErrorCode::ConfigError, "data.targets: path is required");
    for (const auto& [key, path] : {std::pair<std::string, std::string>{"data.targets", c.targets_path},
                                    {"data.covariates", c.covariates_path},
                                    {"data.capacities", c.capacities_path}}) {
        if (!path.empty() && !fs::exists(path)) {
            throw Error(ErrorCode::ConfigError, key + ": file '" + path + "' does not exist");
        }
    }
}

}  // namespace scengen
