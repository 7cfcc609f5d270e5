#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "scengen/data_model.hpp"
#include "scengen/errors.hpp"
#include "scengen/marginals/quantile_loss.hpp"
#include "scengen/random.hpp"

namespace scengen {

enum class LinearVariant { NLinear, DLinear };

inline std::string_view to_string(LinearVariant v) { return v == LinearVariant::NLinear ? "nlinear" : "dlinear"; }

inline LinearVariant parse_variant(std::string_view text) {
    if (text == "nlinear") return LinearVariant::NLinear;
    if (text == "dlinear") return LinearVariant::DLinear;
    throw Error(ErrorCode::ConfigError, "unknown model variant '" + std::string(text) + "'");
}

struct ModelShape {
    std::size_t series = 0;      ///< D
    std::size_t covariates = 0;  ///< D'
    std::size_t past = 0;        ///< W
    std::size_t horizon = 0;     ///< H
    std::size_t quantiles = 0;   ///< Q

    std::size_t outputs() const noexcept { return series * horizon * quantiles; }
    friend bool operator==(const ModelShape&, const ModelShape&) = default;
};

/// D×H×Q predictive quantiles. Flat index (i·H + h)·Q + q.
class QuantileTensor {
public:
    QuantileTensor() = default;
    QuantileTensor(std::size_t series, std::size_t horizon, std::size_t quantiles)
        : series_(series), horizon_(horizon), quantiles_(quantiles), values_(series * horizon * quantiles, 0.0) {}

    std::size_t series() const noexcept { return series_; }
    std::size_t horizon() const noexcept { return horizon_; }
    std::size_t quantiles() const noexcept { return quantiles_; }

    double& at(std::size_t i, std::size_t h, std::size_t q) { return values_[(i * horizon_ + h) * quantiles_ + q]; }
    double at(std::size_t i, std::size_t h, std::size_t q) const { return values_[(i * horizon_ + h) * quantiles_ + q]; }

    /// The Q values of one cell, ascending after predict_quantiles.
    std::span<const double> cell(std::size_t i, std::size_t h) const {
        return {values_.data() + (i * horizon_ + h) * quantiles_, quantiles_};
    }
    std::span<double> cell(std::size_t i, std::size_t h) {
        return {values_.data() + (i * horizon_ + h) * quantiles_, quantiles_};
    }
    const std::vector<double>& flat() const noexcept { return values_; }

private:
    std::size_t series_ = 0, horizon_ = 0, quantiles_ = 0;
    std::vector<double> values_;
};

// ---------------------------------------------------------------------------
// Input transforms

struct NLinearInput {
    Eigen::MatrixXd shifted;  ///< D×W, each row minus its last value
    Eigen::VectorXd last;     ///< D
};

inline NLinearInput nlinear_preprocess(const Eigen::MatrixXd& past_targets) {
    if (past_targets.cols() < 1) throw Error(ErrorCode::ShapeMismatch, "NLinear needs W >= 1");
    NLinearInput out;
    out.last = past_targets.col(past_targets.cols() - 1);
    out.shifted = past_targets.colwise() - out.last;
    return out;
}

inline double nlinear_postprocess(double raw, double last) noexcept { return raw + last; }

struct Decomposition {
    Eigen::MatrixXd trend;     ///< D×W
    Eigen::MatrixXd seasonal;  ///< D×W
};

/// Centered moving average (odd kernel, edge-replicated padding) as trend,
/// remainder as seasonal. The trend is computed as x_i + mean(x_j − x_i) so a
/// constant row has exactly zero seasonal part, then nudged to x − seasonal so
/// that trend + seasonal reproduces the input whenever that is representable.
inline Decomposition dlinear_decompose(const Eigen::MatrixXd& past_targets, std::size_t kernel) {
    const auto W = static_cast<std::size_t>(past_targets.cols());
    if (kernel < 1 || kernel % 2 == 0 || kernel > W) {
        throw Error(ErrorCode::BadKernel, "kernel " + std::to_string(kernel) + " must be odd and in [1, " +
                                              std::to_string(W) + "]");
    }
    const auto half = static_cast<std::ptrdiff_t>(kernel / 2);
    const auto last = static_cast<std::ptrdiff_t>(W) - 1;
    Decomposition out{Eigen::MatrixXd(past_targets.rows(), past_targets.cols()),
                      Eigen::MatrixXd(past_targets.rows(), past_targets.cols())};
    for (Eigen::Index r = 0; r < past_targets.rows(); ++r) {
        for (std::ptrdiff_t c = 0; c <= last; ++c) {
            const double centre = past_targets(r, c);
            double dev = 0.0;
            for (std::ptrdiff_t j = c - half; j <= c + half; ++j) {
                dev += past_targets(r, std::clamp<std::ptrdiff_t>(j, 0, last)) - centre;
            }
            const double trend = centre + dev / static_cast<double>(kernel);
            const double seasonal = centre - trend;
            out.seasonal(r, c) = seasonal;
            out.trend(r, c) = centre - seasonal;
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Model

enum class LrSchedule { Constant, Cosine };

inline std::string_view to_string(LrSchedule s) { return s == LrSchedule::Constant ? "constant" : "cosine"; }

inline LrSchedule parse_lr_schedule(std::string_view text) {
    if (text == "constant") return LrSchedule::Constant;
    if (text == "cosine") return LrSchedule::Cosine;
    throw Error(ErrorCode::ConfigError, "unknown learning-rate schedule '" + std::string(text) + "'");
}

struct TrainConfig {
    int epochs = 60;
    double learning_rate = 0.05;
    /// Cosine annealing lets the pinball subgradient settle; a constant step
    /// keeps oscillating at a distance proportional to the step.
    LrSchedule schedule = LrSchedule::Cosine;
    std::size_t batch_size = 64;
    std::uint64_t seed = 0;
    /// Restrict each output to the lags of its own series (covariates stay shared).
    bool per_series = false;
};

struct TrainReport {
    std::vector<double> epoch_loss;  ///< mean pinball loss; [0] is the initial model
    std::size_t best_epoch = 0;
    double initial_loss() const { return epoch_loss.front(); }
    double final_loss() const { return epoch_loss[best_epoch]; }
};

/// Joint linear quantile regressor over all series. Every output
/// (series i, step h, level q) is an affine function of the flattened inputs:
///
///   NLinear features: [past targets − last value (D·W) | past covariates (D'·W) | future covariates (D'·H)]
///   DLinear features: [trend (D·W) | seasonal (D·W) | past covariates | future covariates]
///
/// NLinear adds the last observed value of series i back onto every output of
/// series i. Covariates are standardized with statistics stored in the model.
class LinearQuantileModel {
public:
    LinearQuantileModel() = default;

    LinearQuantileModel(LinearVariant variant, ModelShape shape, QuantileSet levels, std::size_t kernel = 7)
        : variant_(variant), shape_(shape), levels_(std::move(levels)), kernel_(kernel) {
        if (shape_.quantiles != levels_.size()) {
            throw Error(ErrorCode::ShapeMismatch, "shape has " + std::to_string(shape_.quantiles) +
                                                      " quantiles but the level set has " +
                                                      std::to_string(levels_.size()));
        }
        if (variant_ == LinearVariant::DLinear && (kernel_ < 1 || kernel_ % 2 == 0 || kernel_ > shape_.past)) {
            throw Error(ErrorCode::BadKernel, "DLinear kernel " + std::to_string(kernel_) + " must be odd and <= W=" +
                                                  std::to_string(shape_.past));
        }
        weights_ = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(shape_.outputs()),
                                         static_cast<Eigen::Index>(feature_count()));
        bias_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape_.outputs()));
        cov_mean_ = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(shape_.covariates));
        cov_scale_ = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(shape_.covariates));
    }

    LinearVariant variant() const noexcept { return variant_; }
    const ModelShape& shape() const noexcept { return shape_; }
    const QuantileSet& levels() const noexcept { return levels_; }
    std::size_t kernel() const noexcept { return kernel_; }
    std::uint64_t seed() const noexcept { return seed_; }
    bool per_series() const noexcept { return per_series_; }

    std::size_t target_block() const noexcept { return shape_.series * shape_.past; }
    std::size_t target_features() const noexcept {
        return variant_ == LinearVariant::DLinear ? 2 * target_block() : target_block();
    }
    std::size_t feature_count() const noexcept {
        return target_features() + shape_.covariates * (shape_.past + shape_.horizon);
    }
    std::size_t output_index(std::size_t i, std::size_t h, std::size_t q) const noexcept {
        return (i * shape_.horizon + h) * shape_.quantiles + q;
    }

    Eigen::MatrixXd& weights() noexcept { return weights_; }
    const Eigen::MatrixXd& weights() const noexcept { return weights_; }
    Eigen::VectorXd& bias() noexcept { return bias_; }
    const Eigen::VectorXd& bias() const noexcept { return bias_; }
    const Eigen::VectorXd& covariate_mean() const noexcept { return cov_mean_; }
    const Eigen::VectorXd& covariate_scale() const noexcept { return cov_scale_; }

    /// DLinear weight blocks (outputs × D·W).
    auto trend_weights() const { return weights_.leftCols(static_cast<Eigen::Index>(target_block())); }
    auto seasonal_weights() const {
        return weights_.middleCols(static_cast<Eigen::Index>(target_block()), static_cast<Eigen::Index>(target_block()));
    }

    void set_covariate_scaling(Eigen::VectorXd mean, Eigen::VectorXd scale) {
        cov_mean_ = std::move(mean);
        cov_scale_ = std::move(scale);
    }
    void set_training_info(std::uint64_t seed, bool per_series) {
        seed_ = seed;
        per_series_ = per_series;
    }

    void check_window(const ForecastWindow& w) const {
        auto mismatch = [&](const char* what, Eigen::Index r, Eigen::Index c, std::size_t er, std::size_t ec) {
            if (static_cast<std::size_t>(r) != er || static_cast<std::size_t>(c) != ec) {
                throw Error(ErrorCode::ShapeMismatch, std::string(what) + " is " + std::to_string(r) + "x" +
                                                          std::to_string(c) + ", model expects " + std::to_string(er) +
                                                          "x" + std::to_string(ec));
            }
        };
        mismatch("past targets", w.past_targets.rows(), w.past_targets.cols(), shape_.series, shape_.past);
        mismatch("past covariates", w.past_covariates.rows(), w.past_covariates.cols(), shape_.covariates, shape_.past);
        mismatch("future covariates", w.future_covariates.rows(), w.future_covariates.cols(), shape_.covariates,
                 shape_.horizon);
    }

    /// Writes the feature vector of `w` into `out` and the per-series offsets
    /// (last values for NLinear, zeros for DLinear) into `offset`.
    template <class FeatureRow, class OffsetRow>
    void features(const ForecastWindow& w, FeatureRow&& out, OffsetRow&& offset) const {
        const auto D = static_cast<Eigen::Index>(shape_.series);
        const auto W = static_cast<Eigen::Index>(shape_.past);
        const auto H = static_cast<Eigen::Index>(shape_.horizon);
        const auto C = static_cast<Eigen::Index>(shape_.covariates);
        Eigen::Index pos = 0;
        auto put_rowmajor = [&](const Eigen::MatrixXd& m) {
            for (Eigen::Index r = 0; r < m.rows(); ++r)
                for (Eigen::Index c = 0; c < m.cols(); ++c) out(pos++) = m(r, c);
        };
        if (variant_ == LinearVariant::NLinear) {
            const auto in = nlinear_preprocess(w.past_targets);
            put_rowmajor(in.shifted);
            for (Eigen::Index i = 0; i < D; ++i) offset(i) = in.last(i);
        } else {
            const auto dec = dlinear_decompose(w.past_targets, kernel_);
            put_rowmajor(dec.trend);
            put_rowmajor(dec.seasonal);
            for (Eigen::Index i = 0; i < D; ++i) offset(i) = 0.0;
        }
        for (Eigen::Index r = 0; r < C; ++r)
            for (Eigen::Index c = 0; c < W; ++c) out(pos++) = (w.past_covariates(r, c) - cov_mean_(r)) / cov_scale_(r);
        for (Eigen::Index r = 0; r < C; ++r)
            for (Eigen::Index c = 0; c < H; ++c) out(pos++) = (w.future_covariates(r, c) - cov_mean_(r)) / cov_scale_(r);
    }

    friend bool operator==(const LinearQuantileModel& a, const LinearQuantileModel& b) {
        return a.variant_ == b.variant_ && a.shape_ == b.shape_ && a.levels_ == b.levels_ && a.kernel_ == b.kernel_ &&
               a.weights_ == b.weights_ && a.bias_ == b.bias_ && a.cov_mean_ == b.cov_mean_ &&
               a.cov_scale_ == b.cov_scale_;
    }

private:
    LinearVariant variant_ = LinearVariant::NLinear;
    ModelShape shape_{};
    QuantileSet levels_{};
    std::size_t kernel_ = 7;
    std::uint64_t seed_ = 0;
    bool per_series_ = false;
    Eigen::MatrixXd weights_;
    Eigen::VectorXd bias_;
    Eigen::VectorXd cov_mean_;
    Eigen::VectorXd cov_scale_;
};

/// Design matrices for a batch of windows.
struct DesignMatrix {
    Eigen::MatrixXd features;  ///< N × F
    Eigen::MatrixXd offsets;   ///< N × D
    Eigen::MatrixXd targets;   ///< N × (D·H), column i·H + h; empty at inference
};

inline DesignMatrix build_design(const LinearQuantileModel& model, std::span<const ForecastWindow> windows,
                                 bool with_targets) {
    const auto& s = model.shape();
    const auto N = static_cast<Eigen::Index>(windows.size());
    DesignMatrix dm{Eigen::MatrixXd(N, static_cast<Eigen::Index>(model.feature_count())),
                    Eigen::MatrixXd(N, static_cast<Eigen::Index>(s.series)), Eigen::MatrixXd()};
    if (with_targets) dm.targets.resize(N, static_cast<Eigen::Index>(s.series * s.horizon));
    for (Eigen::Index n = 0; n < N; ++n) {
        const auto& w = windows[static_cast<std::size_t>(n)];
        model.check_window(w);
        model.features(w, dm.features.row(n), dm.offsets.row(n));
        if (with_targets) {
            if (!w.future_targets) {
                throw Error(ErrorCode::ShapeMismatch, "window at origin " + std::to_string(w.origin) + " has no targets");
            }
            const auto& y = *w.future_targets;
            if (static_cast<std::size_t>(y.rows()) != s.series || static_cast<std::size_t>(y.cols()) != s.horizon) {
                throw Error(ErrorCode::ShapeMismatch, "future targets have the wrong shape");
            }
            for (std::size_t i = 0; i < s.series; ++i)
                for (std::size_t h = 0; h < s.horizon; ++h)
                    dm.targets(n, static_cast<Eigen::Index>(i * s.horizon + h)) = y(i, h);
        }
    }
    return dm;
}

namespace detail {

/// Raw (unsorted) predictions N × outputs.
inline Eigen::MatrixXd raw_predictions(const LinearQuantileModel& model, const Eigen::MatrixXd& features,
                                       const Eigen::MatrixXd& offsets) {
    const auto& s = model.shape();
    Eigen::MatrixXd pred = features * model.weights().transpose();
    pred.rowwise() += model.bias().transpose();
    const auto per_series = static_cast<Eigen::Index>(s.horizon * s.quantiles);
    for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(s.series); ++i) {
        pred.middleCols(i * per_series, per_series).colwise() += offsets.col(i);
    }
    return pred;
}

struct LossGradient {
    double objective = 0.0;  ///< (1/N) Σ_n Σ_{i,h,q} QL
    Eigen::MatrixXd d_weights;
    Eigen::VectorXd d_bias;
};

/// Training objective and its (sub)gradient. The objective sums the pinball
/// loss over outputs and averages over windows.
inline LossGradient loss_and_gradient(const LinearQuantileModel& model, const Eigen::MatrixXd& features,
                                      const Eigen::MatrixXd& offsets, const Eigen::MatrixXd& targets,
                                      bool want_gradient = true) {
    const auto& s = model.shape();
    const Eigen::MatrixXd pred = raw_predictions(model, features, offsets);
    const auto N = pred.rows();
    Eigen::MatrixXd grad(N, pred.cols());
    double total = 0.0;
    for (Eigen::Index n = 0; n < N; ++n) {
        for (std::size_t cell = 0; cell < s.series * s.horizon; ++cell) {
            const double z = targets(n, static_cast<Eigen::Index>(cell));
            for (std::size_t q = 0; q < s.quantiles; ++q) {
                const auto o = static_cast<Eigen::Index>(cell * s.quantiles + q);
                const double level = model.levels()[q];
                const double zh = pred(n, o);
                total += quantile_loss(z, zh, level);
                grad(n, o) = zh > z ? 1.0 - level : (zh < z ? -level : 0.0);
            }
        }
    }
    LossGradient out;
    out.objective = total / static_cast<double>(N);
    if (want_gradient) {
        out.d_weights = grad.transpose() * features / static_cast<double>(N);
        out.d_bias = grad.colwise().sum().transpose() / static_cast<double>(N);
    }
    return out;
}

inline Eigen::MatrixXd per_series_mask(const LinearQuantileModel& model) {
    const auto& s = model.shape();
    Eigen::MatrixXd mask = Eigen::MatrixXd::Ones(model.weights().rows(), model.weights().cols());
    const std::size_t blocks = model.target_features() / model.target_block();
    for (std::size_t i = 0; i < s.series; ++i) {
        for (std::size_t other = 0; other < s.series; ++other) {
            if (other == i) continue;
            for (std::size_t b = 0; b < blocks; ++b) {
                const auto col = static_cast<Eigen::Index>(b * model.target_block() + other * s.past);
                const auto row = static_cast<Eigen::Index>(i * s.horizon * s.quantiles);
                mask.block(row, col, static_cast<Eigen::Index>(s.horizon * s.quantiles),
                           static_cast<Eigen::Index>(s.past))
                    .setZero();
            }
        }
    }
    return mask;
}

}  // namespace detail

/// Infers the model shape from the first window and checks the rest.
inline ModelShape shape_of(std::span<const ForecastWindow> windows, const QuantileSet& levels) {
    if (windows.empty()) throw Error(ErrorCode::RangeTooShort, "no training windows");
    const auto& w = windows.front();
    ModelShape s{static_cast<std::size_t>(w.past_targets.rows()), static_cast<std::size_t>(w.past_covariates.rows()),
                 static_cast<std::size_t>(w.past_targets.cols()), static_cast<std::size_t>(w.future_covariates.cols()),
                 levels.size()};
    return s;
}

/// Fits a linear quantile model by mini-batch gradient descent on the summed
/// pinball loss. Weights start at zero (NLinear then starts as persistence).
/// The returned parameters are those of the epoch with the lowest full-batch
/// training loss, epoch 0 being the initialization.
inline LinearQuantileModel fit_linear_quantile(std::span<const ForecastWindow> windows, const QuantileSet& levels,
                                               LinearVariant variant, const TrainConfig& cfg,
                                               std::size_t kernel = 7, TrainReport* report = nullptr) {
    const ModelShape shape = shape_of(windows, levels);
    LinearQuantileModel model(variant, shape, levels, kernel);
    model.set_training_info(cfg.seed, cfg.per_series);

    if (shape.covariates > 0) {
        const auto C = static_cast<Eigen::Index>(shape.covariates);
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(C), sq = Eigen::VectorXd::Zero(C);
        double count = 0.0;
        for (const auto& w : windows) {
            sum += w.past_covariates.rowwise().sum();
            sq += w.past_covariates.array().square().matrix().rowwise().sum();
            count += static_cast<double>(w.past_covariates.cols());
        }
        const Eigen::VectorXd mean = sum / count;
        Eigen::VectorXd scale = (sq / count - mean.array().square().matrix()).cwiseMax(0.0).cwiseSqrt();
        for (Eigen::Index r = 0; r < C; ++r)
            if (!(scale(r) > 1e-12)) scale(r) = 1.0;
        model.set_covariate_scaling(mean, scale);
    }

    const DesignMatrix dm = build_design(model, windows, true);
    const std::optional<Eigen::MatrixXd> mask =
        cfg.per_series ? std::optional<Eigen::MatrixXd>(detail::per_series_mask(model)) : std::nullopt;

    TrainReport local;
    TrainReport& rep = report ? *report : local;
    rep = TrainReport{};
    rep.epoch_loss.push_back(detail::loss_and_gradient(model, dm.features, dm.offsets, dm.targets, false).objective /
                             static_cast<double>(shape.outputs()));
    if (!std::isfinite(rep.epoch_loss.back())) {
        throw Error(ErrorCode::NonFiniteLoss, "initial loss is not finite");
    }

    Eigen::MatrixXd best_w = model.weights();
    Eigen::VectorXd best_b = model.bias();
    const std::size_t N = windows.size();
    const std::size_t batch = std::max<std::size_t>(1, std::min(cfg.batch_size, N));
    std::vector<Eigen::Index> order(N);
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    RngStream rng(cfg.seed, fnv1a64("train-shuffle"));

    Eigen::MatrixXd xb, ob, yb;
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        const double lr = cfg.schedule == LrSchedule::Constant
                              ? cfg.learning_rate
                              : cfg.learning_rate * 0.5 *
                                    (1.0 + std::cos(std::numbers::pi * (epoch - 1) / static_cast<double>(cfg.epochs)));
        rng.shuffle(order.begin(), order.end());
        for (std::size_t start = 0; start < N; start += batch) {
            const std::size_t len = std::min(batch, N - start);
            const std::span<const Eigen::Index> idx(order.data() + start, len);
            xb = dm.features(idx, Eigen::all);
            ob = dm.offsets(idx, Eigen::all);
            yb = dm.targets(idx, Eigen::all);
            auto g = detail::loss_and_gradient(model, xb, ob, yb);
            if (mask) g.d_weights.array() *= mask->array();
            model.weights() -= lr * g.d_weights;
            model.bias() -= lr * g.d_bias;
        }
        const double loss = detail::loss_and_gradient(model, dm.features, dm.offsets, dm.targets, false).objective /
                            static_cast<double>(shape.outputs());
        if (!std::isfinite(loss)) {
            throw Error(ErrorCode::NonFiniteLoss, "training loss diverged at epoch " + std::to_string(epoch));
        }
        rep.epoch_loss.push_back(loss);
        if (loss < rep.epoch_loss[rep.best_epoch]) {
            rep.best_epoch = static_cast<std::size_t>(epoch);
            best_w = model.weights();
            best_b = model.bias();
        }
    }
    model.weights() = std::move(best_w);
    model.bias() = std::move(best_b);
    return model;
}

/// Predictive quantiles for a batch of windows. Each cell's Q values are sorted
/// ascending, which repairs quantile crossing.
inline std::vector<QuantileTensor> predict_quantiles(const LinearQuantileModel& model,
                                                     std::span<const ForecastWindow> windows) {
    const auto& s = model.shape();
    const DesignMatrix dm = build_design(model, windows, false);
    const Eigen::MatrixXd pred = detail::raw_predictions(model, dm.features, dm.offsets);
    std::vector<QuantileTensor> out;
    out.reserve(windows.size());
    for (Eigen::Index n = 0; n < pred.rows(); ++n) {
        QuantileTensor t(s.series, s.horizon, s.quantiles);
        for (std::size_t i = 0; i < s.series; ++i) {
            for (std::size_t h = 0; h < s.horizon; ++h) {
                auto cell = t.cell(i, h);
                for (std::size_t q = 0; q < s.quantiles; ++q) {
                    cell[q] = pred(n, static_cast<Eigen::Index>(model.output_index(i, h, q)));
                }
                std::sort(cell.begin(), cell.end());
            }
        }
        out.push_back(std::move(t));
    }
    return out;
}

inline QuantileTensor predict_quantiles(const LinearQuantileModel& model, const ForecastWindow& window) {
    return predict_quantiles(model, std::span<const ForecastWindow>(&window, 1)).front();
}

/// Mean pinball loss of a fitted model over windows with targets.
inline double evaluate_pinball(const LinearQuantileModel& model, std::span<const ForecastWindow> windows) {
    const DesignMatrix dm = build_design(model, windows, true);
    return detail::loss_and_gradient(model, dm.features, dm.offsets, dm.targets, false).objective /
           static_cast<double>(model.shape().outputs());
}

}  // namespace scengen
