#pragma once

#include <cstdint>
#include <random>

#include <Eigen/SVD>

#include "ddempc/box.hpp"
#include "ddempc/errors.hpp"
#include "ddempc/hankel.hpp"
#include "ddempc/types.hpp"

namespace ddempc {

/**
 * @brief Discrete-time LTI system x_{k+1} = A x_k + B u_k, y_k = C x_k + D u_k.
 *
 * Used to generate offline data and to act as the plant in closed-loop runs.
 * The controller itself never reads these matrices.
 */
template <typename Scalar>
struct StateSpace {
    Mat<Scalar> A, B, C, D;

    StateSpace() = default;
    StateSpace(Mat<Scalar> a, Mat<Scalar> b, Mat<Scalar> c, Mat<Scalar> d)
        : A(std::move(a)), B(std::move(b)), C(std::move(c)), D(std::move(d)) {
        if (A.rows() != A.cols() || A.rows() == 0)
            throw DimensionError("StateSpace: A must be square and nonempty");
        if (B.rows() != A.rows() || C.cols() != A.rows() || D.rows() != C.rows() ||
            D.cols() != B.cols() || B.cols() == 0 || C.rows() == 0)
            throw DimensionError("StateSpace: inconsistent B, C, D dimensions");
    }

    Index states() const { return A.rows(); }
    Index inputs() const { return B.cols(); }
    Index outputs() const { return C.rows(); }
};

using StateSpaced = StateSpace<double>;

template <typename Scalar>
struct SimTrajectory {
    Signal<Scalar> u;
    Signal<Scalar> y;
    Signal<Scalar> x;  ///< states x_0 .. x_T, one more column than u
};

template <typename Scalar, typename DerivedX, typename DerivedU>
SimTrajectory<Scalar> simulate(const StateSpace<Scalar>& sys, const Eigen::MatrixBase<DerivedX>& x0,
                               const Eigen::MatrixBase<DerivedU>& u_in) {
    const Signal<Scalar> u = u_in;  // evaluate nullary expressions exactly once
    if (x0.size() != sys.states() || u.rows() != sys.inputs())
        throw DimensionError("simulate: x0 or input dimension does not match the system");
    if (u.cols() < 1)
        throw DimensionError("simulate: empty input sequence");
    SimTrajectory<Scalar> out;
    out.u = u;
    out.y.resize(sys.outputs(), u.cols());
    out.x.resize(sys.states(), u.cols() + 1);
    out.x.col(0) = x0;
    for (Index k = 0; k < u.cols(); ++k) {
        out.y.col(k).noalias() = sys.C * out.x.col(k) + sys.D * u.col(k);
        out.x.col(k + 1).noalias() = sys.A * out.x.col(k) + sys.B * u.col(k);
    }
    return out;
}

/// Number of singular values above rel_tol * sigma_max.
template <typename Derived>
Index numerical_rank(const Eigen::MatrixBase<Derived>& m, double rel_tol = 1e-8) {
    if (m.size() == 0) return 0;
    Eigen::JacobiSVD<Mat<typename Derived::Scalar>> svd(m);
    const auto& s = svd.singularValues();
    if (s.size() == 0 || s(0) == 0) return 0;
    Index r = 0;
    for (Index i = 0; i < s.size(); ++i)
        if (s(i) > rel_tol * s(0)) ++r;
    return r;
}

template <typename Scalar>
Mat<Scalar> controllability_matrix(const StateSpace<Scalar>& sys) {
    const Index n = sys.states(), m = sys.inputs();
    Mat<Scalar> ctrb(n, n * m);
    Mat<Scalar> blk = sys.B;
    for (Index i = 0; i < n; ++i) {
        ctrb.middleCols(i * m, m) = blk;
        blk = sys.A * blk;
    }
    return ctrb;
}

/// Stacked [C; CA; ...; CA^{depth-1}]. depth defaults to n.
template <typename Scalar>
Mat<Scalar> observability_matrix(const StateSpace<Scalar>& sys, Index depth = -1) {
    if (depth < 0) depth = sys.states();
    const Index n = sys.states(), p = sys.outputs();
    Mat<Scalar> obsv(depth * p, n);
    Mat<Scalar> blk = sys.C;
    for (Index i = 0; i < depth; ++i) {
        obsv.middleRows(i * p, p) = blk;
        blk = blk * sys.A;
    }
    return obsv;
}

template <typename Scalar>
bool is_minimal(const StateSpace<Scalar>& sys, double rel_tol = 1e-8) {
    return numerical_rank(controllability_matrix(sys), rel_tol) == sys.states() &&
           numerical_rank(observability_matrix(sys), rel_tol) == sys.states();
}

/// Lower block-triangular map from stacked inputs to stacked outputs over `depth` steps
/// (zero initial state).
template <typename Scalar>
Mat<Scalar> toeplitz_response(const StateSpace<Scalar>& sys, Index depth) {
    const Index m = sys.inputs(), p = sys.outputs();
    Mat<Scalar> T = Mat<Scalar>::Zero(depth * p, depth * m);
    std::vector<Mat<Scalar>> markov;
    markov.push_back(sys.D);
    Mat<Scalar> cak = sys.C;
    for (Index k = 1; k < depth; ++k) {
        markov.push_back(cak * sys.B);
        cak = cak * sys.A;
    }
    for (Index i = 0; i < depth; ++i)
        for (Index j = 0; j <= i; ++j)
            T.block(i * p, j * m, p, m) = markov[static_cast<std::size_t>(i - j)];
    return T;
}

/**
 * @brief Distance of an input-output window from the system behaviour.
 *
 * Finds the initial state that best explains (u, y) in the least-squares sense and returns
 * the largest remaining output mismatch. Zero (up to rounding) iff (u, y) is a trajectory.
 */
template <typename Scalar, typename DerivedU, typename DerivedY>
Scalar trajectory_residual(const StateSpace<Scalar>& sys, const Eigen::MatrixBase<DerivedU>& u_in,
                           const Eigen::MatrixBase<DerivedY>& y_in) {
    const Signal<Scalar> u = u_in, y = y_in;
    if (u.rows() != sys.inputs() || y.rows() != sys.outputs() || u.cols() != y.cols())
        throw DimensionError("trajectory_residual: window dimensions do not match the system");
    const Index depth = u.cols();
    const Mat<Scalar> obsv = observability_matrix(sys, depth);
    const Vec<Scalar> forced = toeplitz_response(sys, depth) * stack(u);
    const Vec<Scalar> free = stack(y) - forced;
    const Vec<Scalar> x0 = obsv.completeOrthogonalDecomposition().solve(free);
    return (free - obsv * x0).cwiseAbs().maxCoeff();
}

/// State at the end of an observed window, i.e. x_t given u_[t-w, t-1] and y_[t-w, t-1].
template <typename Scalar, typename DerivedU, typename DerivedY>
Vec<Scalar> reconstruct_state(const StateSpace<Scalar>& sys, const Eigen::MatrixBase<DerivedU>& u_in,
                              const Eigen::MatrixBase<DerivedY>& y_in) {
    const Signal<Scalar> u = u_in, y = y_in;
    if (u.rows() != sys.inputs() || y.rows() != sys.outputs() || u.cols() != y.cols())
        throw DimensionError("reconstruct_state: window dimensions do not match the system");
    const Index depth = u.cols();
    const Mat<Scalar> obsv = observability_matrix(sys, depth);
    const Vec<Scalar> free = stack(y) - toeplitz_response(sys, depth) * stack(u);
    Vec<Scalar> x = obsv.completeOrthogonalDecomposition().solve(free);
    for (Index k = 0; k < depth; ++k)
        x = sys.A * x + sys.B * u.col(k);
    return x;
}

/// Steady-state output for a constant input, y_e = (C (I - A)^{-1} B + D) u_e.
template <typename Scalar, typename Derived>
Vec<Scalar> equilibrium_of(const StateSpace<Scalar>& sys, const Eigen::MatrixBase<Derived>& ue,
                           double rel_tol = 1e-10) {
    if (ue.size() != sys.inputs())
        throw DimensionError("equilibrium_of: input dimension mismatch");
    const Mat<Scalar> IminusA = Mat<Scalar>::Identity(sys.states(), sys.states()) - sys.A;
    Eigen::FullPivLU<Mat<Scalar>> lu(IminusA);
    lu.setThreshold(rel_tol);
    if (!lu.isInvertible())
        throw MarginalEquilibriumError("equilibrium_of: I - A is singular");
    const Vec<Scalar> xe = lu.solve(sys.B * ue);
    return sys.C * xe + sys.D * ue;
}

/// DC gain C (I - A)^{-1} B + D.
template <typename Scalar>
Mat<Scalar> dc_gain(const StateSpace<Scalar>& sys) {
    Mat<Scalar> gain(sys.outputs(), sys.inputs());
    for (Index j = 0; j < sys.inputs(); ++j)
        gain.col(j) = equilibrium_of(sys, Vec<Scalar>::Unit(sys.inputs(), j));
    return gain;
}

/// Name of the generator used by generate_pe_data; recorded in dataset metadata.
inline constexpr const char* kDataRngName = "mt19937_64/53bit-uniform";

/// Uniform double in [0, 1) from the top 53 bits; identical on every platform.
inline double unit_uniform(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

/**
 * @brief Records one open-loop experiment from x0 = 0 with i.i.d. uniform inputs.
 *
 * Each input channel is drawn from [input_box.lower, input_box.upper] with a seeded
 * mt19937_64, so the same seed reproduces the same file bit for bit.
 */
template <typename Scalar>
DataTrajectory<Scalar> generate_pe_data(const StateSpace<Scalar>& sys, Index length,
                                        const BoxSet& input_box, std::uint64_t seed) {
    if (length < 1) throw DimensionError("generate_pe_data: length must be at least 1");
    if (input_box.channels() != sys.inputs())
        throw DimensionError("generate_pe_data: input box dimension mismatch");
    if (!input_box.bounded())
        throw ConfigError("generate_pe_data: input box must be bounded");
    std::mt19937_64 gen(seed);
    Signal<Scalar> u(sys.inputs(), length);
    for (Index k = 0; k < length; ++k)
        for (Index i = 0; i < sys.inputs(); ++i) {
            const double lo = input_box.lower(i), hi = input_box.upper(i);
            u(i, k) = static_cast<Scalar>(lo + (hi - lo) * unit_uniform(gen));
        }
    auto sim = simulate(sys, Vec<Scalar>::Zero(sys.states()), u);
    return DataTrajectory<Scalar>(std::move(sim.u), std::move(sim.y));
}

}  // namespace ddempc
