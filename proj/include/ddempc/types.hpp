#pragma once

#include <Eigen/Dense>

namespace ddempc {

using Eigen::Index;

template <typename Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using Vec = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

/// A sampled vector signal: one column per time step, one row per channel.
template <typename Scalar>
using Signal = Mat<Scalar>;

using Matd = Mat<double>;
using Vecd = Vec<double>;
using Signald = Signal<double>;

/// Stacks the columns of a signal into x_[0, N-1].
template <typename Derived>
Vec<typename Derived::Scalar> stack(const Eigen::MatrixBase<Derived>& signal) {
    Vec<typename Derived::Scalar> out(signal.size());
    Index k = 0;
    for (Index j = 0; j < signal.cols(); ++j)
        for (Index i = 0; i < signal.rows(); ++i)
            out(k++) = signal(i, j);
    return out;
}

/// Inverse of stack(): reshapes x_[0, N-1] into a channels x N signal.
template <typename Derived>
Signal<typename Derived::Scalar> unstack(const Eigen::MatrixBase<Derived>& stacked,
                                         Index channels) {
    const Index steps = channels == 0 ? 0 : stacked.size() / channels;
    Signal<typename Derived::Scalar> out(channels, steps);
    for (Index j = 0; j < steps; ++j)
        out.col(j) = stacked.segment(j * channels, channels);
    return out;
}

}  // namespace ddempc
