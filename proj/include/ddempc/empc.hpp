#pragma once

#include <optional>
#include <string>

#include "ddempc/box.hpp"
#include "ddempc/hankel.hpp"
#include "ddempc/lp.hpp"
#include "ddempc/lti_plant.hpp"

namespace ddempc {

/// l(u, y) = l_u' u + l_y' y.
struct LinearCost {
    Vecd l_u;
    Vecd l_y;

    template <typename DU, typename DY>
    double operator()(const Eigen::MatrixBase<DU>& u, const Eigen::MatrixBase<DY>& y) const {
        return l_u.dot(u) + l_y.dot(y);
    }

    static LinearCost zero(Index m, Index p) { return {Vecd::Zero(m), Vecd::Zero(p)}; }

    friend bool operator==(const LinearCost& a, const LinearCost& b) {
        return a.l_u == b.l_u && a.l_y == b.l_y;
    }
};

/// The last n input/output samples, u_[t-n, t-1] and y_[t-n, t-1], oldest first.
struct ExtendedState {
    Signald u;
    Signald y;

    static ExtendedState zeros(Index order, Index m, Index p) {
        return {Signald::Zero(m, order), Signald::Zero(p, order)};
    }

    Index order() const { return u.cols(); }

    /// Drops the oldest sample and appends (u_t, y_t).
    void push(const Vecd& ut, const Vecd& yt) {
        const Index n = order();
        if (n == 0) return;
        u.leftCols(n - 1) = u.rightCols(n - 1).eval();
        y.leftCols(n - 1) = y.rightCols(n - 1).eval();
        u.col(n - 1) = ut;
        y.col(n - 1) = yt;
    }
};

enum class CostMode {
    known,       ///< stage cost l(u, y) is given explicitly
    data_driven  ///< stage cost is predicted from the recorded cost samples l^d
};

struct EmpcConfig {
    Index horizon = 1;  ///< L
    Index order = 1;    ///< n, an upper bound on the system order
    double beta = 1.0;  ///< weight on the artificial equilibrium's stage cost
    double alpha_reg = 1e-2;
    BoxSet input_box;
    BoxSet output_box;
    CostMode cost_mode = CostMode::known;
    /// The stage cost. In data-driven mode the controller never reads it; it is only used to
    /// score realised closed-loop samples.
    LinearCost cost;
    /// Initial terminal-cost bound; nullopt selects the optimal achievable cost l°(xi_0, L).
    std::optional<double> l_bar0;
    double pe_tol = 1e-8;
    LpOptions lp;

    /// Required excitation order of the data, L + 2n + 1.
    Index required_pe_order() const { return horizon + 2 * order + 1; }

    void validate(Index m, Index p) const;
};

/// Column offsets of each variable block inside a compiled EMPC program.
struct EmpcLayout {
    Index m = 0, p = 0, order = 0, horizon = 0;
    Index alpha = 0, alpha_count = 0;
    Index u = 0, y = 0;      ///< windows over k = -n .. L
    Index ue = 0, ye = 0;
    Index cost = -1;         ///< predicted l_[-n, L]; data-driven mode only
    Index bound_slack = -1;  ///< slack of the terminal-cost bound row
    Index abs_alpha = -1;    ///< |alpha| epigraph variables, when regularised

    Index window() const { return horizon + order + 1; }
    Index u_at(Index k, Index j) const { return u + (k + order) * m + j; }
    Index y_at(Index k, Index j) const { return y + (k + order) * p + j; }
    Index cost_at(Index k) const { return cost + k + order; }
};

struct EmpcProgram {
    LinearProgram lp;
    EmpcLayout layout;
};

struct EmpcSolution {
    LpStatus status = LpStatus::numerical_failure;
    Vecd alpha;
    Signald u;  ///< predicted inputs, columns k = -n .. L
    Signald y;  ///< predicted outputs, columns k = -n .. L
    Vecd ue;
    Vecd ye;
    double terminal_cost = 0.0;       ///< l(u_e, y_e), or the predicted l_L in data-driven mode
    double objective = 0.0;           ///< running cost + beta * terminal cost
    double objective_with_reg = 0.0;  ///< full LP objective
    Index iterations = 0;
    Index order = 0;

    bool optimal() const { return status == LpStatus::optimal; }
    /// u_0, the input applied in closed loop.
    Vecd first_input() const { return u.col(order); }
    Vecd first_output() const { return y.col(order); }
};

/// Problem with known linear stage cost; cfg.cost_mode must be known.
EmpcProgram build_empc_lp(const DataTrajectoryd& data, const ExtendedState& xi, double l_bar,
                          const EmpcConfig& cfg);

/// Problem whose stage cost is predicted through the Hankel matrix of the cost samples.
/// Never reads cfg.cost.
EmpcProgram build_empc_lp_unknown_cost(const DataTrajectoryd& data, const ExtendedState& xi,
                                       double l_bar, const EmpcConfig& cfg);

/// Dispatches on cfg.cost_mode.
EmpcProgram build_empc_program(const DataTrajectoryd& data, const ExtendedState& xi,
                               double l_bar, const EmpcConfig& cfg);

/// Restricts the artificial equilibrium to a given pair (terminal equality constraint variant).
EmpcProgram fix_terminal_equilibrium(EmpcProgram program, const Vecd& ue, const Vecd& ye);

EmpcSolution extract_solution(const EmpcProgram& program, const LpResult& result,
                              const EmpcConfig& cfg);

EmpcSolution solve_empc(const DataTrajectoryd& data, const ExtendedState& xi, double l_bar,
                        const EmpcConfig& cfg, const LpSolveFn& solver = solve_lp);

/**
 * @brief Minimises probe(u_e, y_e) over the equilibria reachable in L steps from xi.
 *
 * Keeps the Hankel, initial-condition, terminal-window and box constraints only: no
 * terminal-cost bound, no running cost, no regularisation.
 * @throws InitialInfeasibilityError if no equilibrium is reachable.
 */
double enumerate_reachability_lp(const DataTrajectoryd& data, const ExtendedState& xi,
                                 const EmpcConfig& cfg, const LinearCost& probe);

/// l°(xi, L): the best stage cost reachable in L steps. In data-driven mode the predicted
/// terminal cost l_L is minimised instead of an explicit cost.
double optimal_achievable_cost(const DataTrajectoryd& data, const ExtendedState& xi,
                               const EmpcConfig& cfg);

struct OptimalEquilibrium {
    Vecd u;
    Vecd y;
    double cost = 0.0;
};

/// Model-based optimal steady state, min l(u, y) s.t. y = G u, u, y in their boxes, with G the
/// DC gain. A test and reporting oracle: the controller does not use it.
OptimalEquilibrium model_based_optimal_equilibrium(const StateSpaced& sys, const BoxSet& input_box,
                                                   const BoxSet& output_box, const LinearCost& cost);

enum class ConstraintFamily { none, initial_condition, terminal_equilibrium, terminal_cost_bound };

const char* to_string(ConstraintFamily f);

/// Adds constraint families one at a time (initial condition, terminal window, cost bound)
/// and reports the first one that makes the problem infeasible.
ConstraintFamily diagnose_infeasibility(const DataTrajectoryd& data, const ExtendedState& xi,
                                       double l_bar, const EmpcConfig& cfg);

}  // namespace ddempc
