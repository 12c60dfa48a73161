#pragma once

#include <optional>
#include <string>

#include <Eigen/SVD>

#include "ddempc/errors.hpp"
#include "ddempc/types.hpp"

namespace ddempc {

/// Recorded input/output (and optionally stage-cost) samples, k = 0 .. N-1.
template <typename Scalar>
class DataTrajectory {
public:
    DataTrajectory() = default;
    DataTrajectory(Signal<Scalar> u, Signal<Scalar> y, std::optional<Vec<Scalar>> cost = std::nullopt)
        : u_(std::move(u)), y_(std::move(y)), cost_(std::move(cost)) {
        if (u_.cols() != y_.cols() || u_.cols() < 1)
            throw DimensionError("DataTrajectory: u and y must share a nonzero length");
        if (cost_ && cost_->size() != u_.cols())
            throw DimensionError("DataTrajectory: cost length differs from u and y");
    }

    Index length() const { return u_.cols(); }
    Index inputs() const { return u_.rows(); }
    Index outputs() const { return y_.rows(); }
    bool has_cost() const { return cost_.has_value(); }

    const Signal<Scalar>& u() const { return u_; }
    const Signal<Scalar>& y() const { return y_; }
    const Vec<Scalar>& cost() const {
        if (!cost_) throw ConfigError("DataTrajectory: no cost samples recorded");
        return *cost_;
    }

    /// Copy with a cost column l_k = f(u_k, y_k).
    template <typename CostFn>
    DataTrajectory with_cost(CostFn&& f) const {
        Vec<Scalar> l(length());
        for (Index k = 0; k < length(); ++k) l(k) = f(u_.col(k), y_.col(k));
        return DataTrajectory(u_, y_, std::move(l));
    }

private:
    Signal<Scalar> u_;
    Signal<Scalar> y_;
    std::optional<Vec<Scalar>> cost_;
};

using DataTrajectoryd = DataTrajectory<double>;

/**
 * @brief Block Hankel matrix H_depth(x) of a q-channel signal.
 *
 * Block (i, j) holds sample x_{i+j}; there are N - depth + 1 columns.
 */
template <typename Scalar>
struct HankelMatrix {
    Mat<Scalar> entries;
    Index depth = 0;
    Index channels = 0;

    Index cols() const { return entries.cols(); }
    auto block(Index i, Index j) const { return entries.block(i * channels, j, channels, 1); }
};

template <typename Derived>
HankelMatrix<typename Derived::Scalar> build_hankel(const Eigen::MatrixBase<Derived>& signal_in,
                                                    Index depth) {
    using Scalar = typename Derived::Scalar;
    const Signal<Scalar> signal = signal_in;
    const Index q = signal.rows(), N = signal.cols();
    if (depth < 1) throw WindowTooLongError("build_hankel: depth must be at least 1");
    if (depth > N)
        throw WindowTooLongError("build_hankel: depth " + std::to_string(depth) +
                                 " exceeds signal length " + std::to_string(N));
    HankelMatrix<Scalar> h;
    h.depth = depth;
    h.channels = q;
    h.entries.resize(depth * q, N - depth + 1);
    for (Index j = 0; j < N - depth + 1; ++j)
        for (Index i = 0; i < depth; ++i)
            h.entries.block(i * q, j, q, 1) = signal.col(i + j);
    return h;
}

struct PeReport {
    bool exciting = false;
    Index order = 0;
    Index required_rank = 0;  ///< m * order
    Index rank = 0;           ///< singular values above tol * sigma_max
    double sigma_max = 0.0;
    double sigma_required = 0.0;  ///< sigma_{m*order}, the smallest one that must be nonzero
    double gap = 0.0;             ///< sigma_required / sigma_max
};

/// Checks rank(H_order(u)) == m * order using singular values relative to sigma_max.
template <typename Derived>
PeReport is_persistently_exciting(const Eigen::MatrixBase<Derived>& u, Index order,
                                  double tol = 1e-8) {
    PeReport r;
    r.order = order;
    r.required_rank = u.rows() * order;
    if (order < 1 || order > u.cols()) return r;
    const auto h = build_hankel(u, order);
    Eigen::JacobiSVD<Mat<typename Derived::Scalar>> svd(h.entries);
    const auto& s = svd.singularValues();
    r.sigma_max = static_cast<double>(s(0));
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > tol * s(0)) ++r.rank;
    // With fewer columns than mL the rank cannot reach mL; the missing singular value is 0.
    r.sigma_required = r.required_rank <= s.size() ? static_cast<double>(s(r.required_rank - 1)) : 0.0;
    r.gap = r.sigma_max > 0 ? r.sigma_required / r.sigma_max : 0.0;
    r.exciting = r.sigma_max > 0 && r.rank == r.required_rank;
    return r;
}

/// [H(u); H(y); H(l)] with depth L + n + 1, rows ordered inputs, outputs, cost.
template <typename Scalar>
struct StackedPredictor {
    Mat<Scalar> matrix;
    Index depth = 0;
    Index input_rows = 0;
    Index output_rows = 0;
    Index cost_rows = 0;

    Index cols() const { return matrix.cols(); }
    auto inputs() const { return matrix.topRows(input_rows); }
    auto outputs() const { return matrix.middleRows(input_rows, output_rows); }
    auto costs() const { return matrix.bottomRows(cost_rows); }
};

template <typename Scalar>
StackedPredictor<Scalar> stacked_predictor(const DataTrajectory<Scalar>& data, Index horizon,
                                           Index order, bool include_cost) {
    const Index depth = horizon + order + 1;
    if (data.length() < depth)
        throw DataTooShortError("stacked_predictor: need at least L + n + 1 = " +
                                std::to_string(depth) + " samples, have " +
                                std::to_string(data.length()));
    if (include_cost && !data.has_cost())
        throw ConfigError("stacked_predictor: cost rows requested but the data has no cost samples");
    const auto hu = build_hankel(data.u(), depth);
    const auto hy = build_hankel(data.y(), depth);
    StackedPredictor<Scalar> p;
    p.depth = depth;
    p.input_rows = hu.entries.rows();
    p.output_rows = hy.entries.rows();
    p.cost_rows = include_cost ? depth : 0;
    p.matrix.resize(p.input_rows + p.output_rows + p.cost_rows, hu.cols());
    p.matrix.topRows(p.input_rows) = hu.entries;
    p.matrix.middleRows(p.input_rows, p.output_rows) = hy.entries;
    if (include_cost)
        p.matrix.bottomRows(depth) = build_hankel(data.cost().transpose(), depth).entries;
    return p;
}

}  // namespace ddempc
