#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "scengen/copula/pit.hpp"
#include "scengen/errors.hpp"

namespace scengen {

struct CorrelationOptions {
    double shrinkage = 0.0;         ///< λ in R ← (1−λ)R + λI
    double eigen_floor = 1e-8;      ///< smallest eigenvalue kept by the repair
    int max_repair_rounds = 50;
};

/// Unit-diagonal symmetric positive-definite correlation matrix plus what it
/// took to get there.
struct CorrelationMatrix {
    Eigen::MatrixXd values;
    double min_eigen_before = 1.0;  ///< after shrinkage, before repair
    double min_eigen_after = 1.0;
    bool repaired = false;
    int repair_rounds = 0;
    double shrinkage = 0.0;
    std::size_t samples = 0;        ///< N columns used

    std::size_t dim() const noexcept { return static_cast<std::size_t>(values.rows()); }
};

namespace detail {

inline void unit_diagonal_symmetric(Eigen::MatrixXd& r) {
    const Eigen::VectorXd s = r.diagonal().cwiseSqrt().cwiseInverse();
    r = s.asDiagonal() * r * s.asDiagonal();
    r = (0.5 * (r + r.transpose())).eval();
    r.diagonal().setOnes();
}

inline double min_eigenvalue(const Eigen::MatrixXd& r) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

}  // namespace detail

/// Clips eigenvalues at twice the floor and renormalizes to unit diagonal,
/// repeated until the floor holds. Renormalizing shrinks the clipped
/// eigenvalues slightly, hence the margin. A final blend toward I (which keeps
/// the diagonal at one) closes any gap left by the rounds.
inline void repair_correlation(CorrelationMatrix& out, const CorrelationOptions& opt) {
    Eigen::MatrixXd& r = out.values;
    double mu = detail::min_eigenvalue(r);
    out.min_eigen_before = mu;
    while (mu < opt.eigen_floor && out.repair_rounds < opt.max_repair_rounds) {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(r);
        const Eigen::VectorXd lambda = es.eigenvalues().cwiseMax(2.0 * opt.eigen_floor);
        r = es.eigenvectors() * lambda.asDiagonal() * es.eigenvectors().transpose();
        detail::unit_diagonal_symmetric(r);
        mu = detail::min_eigenvalue(r);
        out.repaired = true;
        ++out.repair_rounds;
    }
    if (mu < opt.eigen_floor) {
        const double a = std::min(1.0, (opt.eigen_floor - mu) / (1.0 - mu) * (1.0 + 1e-6));
        r = (1.0 - a) * r + a * Eigen::MatrixXd::Identity(r.rows(), r.cols());
        r.diagonal().setOnes();
        mu = detail::min_eigenvalue(r);
        out.repaired = true;
    }
    out.min_eigen_after = mu;
}

/// Pearson correlation between the rows of the PIT matrix, with optional
/// shrinkage and positive-definite repair.
inline CorrelationMatrix estimate_correlation(const PitMatrix& pit, const CorrelationOptions& opt = {}) {
    const auto d = pit.values.rows();
    const auto N = pit.values.cols();
    if (N < 2) throw Error(ErrorCode::InsufficientData, "correlation needs at least 2 samples, got " + std::to_string(N));
    if (!(opt.shrinkage >= 0.0 && opt.shrinkage <= 1.0)) {
        throw Error(ErrorCode::ConfigError, "shrinkage must be in [0, 1]");
    }
    Eigen::MatrixXd centred = pit.values.colwise() - pit.values.rowwise().mean();
    const Eigen::VectorXd ss = centred.rowwise().squaredNorm();
    const std::size_t H = pit.horizon == 0 ? static_cast<std::size_t>(d) : pit.horizon;
    for (Eigen::Index r = 0; r < d; ++r) {
        // A constant row can leave rounding residue after centring, so compare
        // against the row's own scale rather than exact zero.
        const double scale = pit.values.row(r).cwiseAbs().maxCoeff();
        const double noise = 1e-14 * scale;
        if (!(ss(r) > static_cast<double>(N) * noise * noise) || pit.values.row(r).maxCoeff() == pit.values.row(r).minCoeff()) {
            const auto cell = static_cast<std::size_t>(r);
            throw Error(ErrorCode::ZeroVarianceRow, "cell (location " + std::to_string(cell / H) + ", step " +
                                                        std::to_string(cell % H) + ") has zero variance");
        }
    }
    const Eigen::VectorXd inv = ss.cwiseSqrt().cwiseInverse();
    centred = inv.asDiagonal() * centred;

    CorrelationMatrix out;
    out.samples = static_cast<std::size_t>(N);
    out.shrinkage = opt.shrinkage;
    out.values.resize(d, d);
    out.values.setZero();
    out.values.selfadjointView<Eigen::Lower>().rankUpdate(centred);
    out.values = out.values.selfadjointView<Eigen::Lower>();
    out.values = out.values.cwiseMax(-1.0).cwiseMin(1.0);
    out.values.diagonal().setOnes();
    if (opt.shrinkage > 0.0) {
        out.values *= 1.0 - opt.shrinkage;
        out.values.diagonal().setOnes();
    }
    repair_correlation(out, opt);
    return out;
}

/// Wraps an externally supplied correlation matrix, checking the invariants.
inline CorrelationMatrix correlation_from(Eigen::MatrixXd r, const CorrelationOptions& opt = {}) {
    if (r.rows() != r.cols() || r.rows() == 0) throw Error(ErrorCode::DimensionMismatch, "correlation matrix must be square");
    if (!r.allFinite()) throw Error(ErrorCode::NotPositiveDefinite, "correlation matrix has non-finite entries");
    for (Eigen::Index i = 0; i < r.rows(); ++i) {
        if (std::fabs(r(i, i) - 1.0) > 1e-12) {
            throw Error(ErrorCode::NotPositiveDefinite, "diagonal entry " + std::to_string(i) + " is not 1");
        }
    }
    if ((r - r.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
        throw Error(ErrorCode::NotPositiveDefinite, "correlation matrix is not symmetric");
    }
    CorrelationMatrix out;
    out.values = 0.5 * (r + r.transpose());
    out.values.diagonal().setOnes();
    repair_correlation(out, opt);
    return out;
}

}  // namespace scengen
