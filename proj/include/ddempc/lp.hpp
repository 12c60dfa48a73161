#pragma once

#include <functional>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "ddempc/box.hpp"
#include "ddempc/types.hpp"

namespace ddempc {

/**
 * @brief min c'x  s.t.  A_eq x = b_eq,  lower <= x <= upper.
 *
 * Bounds may be +-infinity; a variable with both bounds infinite is free and is
 * handled natively by the solver (no splitting). Inequalities are expressed with
 * explicit slack columns.
 */
struct LinearProgram {
    Vecd c;
    Eigen::SparseMatrix<double> A_eq;
    Vecd b_eq;
    Vecd lower;
    Vecd upper;
    std::vector<std::string> names;

    Index variables() const { return c.size(); }
    Index rows() const { return b_eq.size(); }

    /// Throws DimensionError / ConfigError if the fields do not describe an LP.
    void validate() const;
};

/// Incremental construction of a LinearProgram from named columns and sparse rows.
class LpBuilder {
public:
    Index add_variable(std::string name, double lower, double upper, double cost = 0.0);
    Index add_variables(Index count, const std::string& prefix, double lower, double upper,
                        double cost = 0.0);

    /// Adds sum_j coeff_j x_j = rhs and returns the row index.
    Index add_row(const std::vector<std::pair<Index, double>>& terms, double rhs);
    Index add_empty_row(double rhs);
    void add_entry(Index row, Index col, double value);

    void set_cost(Index col, double value) { cost_[static_cast<std::size_t>(col)] = value; }
    void add_cost(Index col, double value) { cost_[static_cast<std::size_t>(col)] += value; }
    void set_bounds(Index col, double lower, double upper);

    Index variables() const { return static_cast<Index>(cost_.size()); }
    Index rows() const { return static_cast<Index>(rhs_.size()); }

    LinearProgram build() const;

private:
    std::vector<std::string> names_;
    std::vector<double> cost_, lower_, upper_, rhs_;
    std::vector<Eigen::Triplet<double>> entries_;
};

enum class LpStatus { optimal, infeasible, unbounded, numerical_failure };

const char* to_string(LpStatus s);

struct LpOptions {
    double feas_tol = 1e-9;
    /// Reduced-cost tolerance, relative to max(1, |c|_inf).
    double opt_tol = 1e-9;
    /// Consecutive degenerate pivots before switching to Bland's rule.
    Index degenerate_threshold = 50;
    /// Basis inverse is recomputed from scratch this often.
    Index refactor_interval = 100;
    /// 0 selects 50 * (rows + variables).
    Index max_iterations = 0;
};

struct LpResult {
    LpStatus status = LpStatus::numerical_failure;
    Vecd x;
    double objective = 0.0;
    Index iterations = 0;
    double primal_residual = 0.0;    ///< |A_eq x - b_eq|_inf
    double bound_violation = 0.0;    ///< largest excursion outside [lower, upper]
    double dual_infeasibility = 0.0; ///< largest reduced-cost sign violation at exit

    bool optimal() const { return status == LpStatus::optimal; }
};

/**
 * @brief Two-phase revised primal simplex on the bounded-variable form.
 *
 * Dantzig pricing with a Harris ratio test; after `degenerate_threshold` consecutive
 * degenerate pivots it switches to Bland's smallest-index rule until the objective moves.
 * Ties always break towards the smaller variable index, so a given LP is solved along the
 * same pivot path on every run.
 */
LpResult solve_lp(const LinearProgram& lp, const LpOptions& options = {});

/// Solver seam: anything with the solve_lp contract can stand in for the bundled simplex.
using LpSolveFn = std::function<LpResult(const LinearProgram&, const LpOptions&)>;

struct LpCheck {
    double primal_residual = 0.0;
    double bound_violation = 0.0;
    double objective = 0.0;
};

/// Recomputes residuals and objective of a candidate point from scratch.
LpCheck check_solution(const LinearProgram& lp, const Vecd& x);

/**
 * @brief Adds weight * |x_[first, first+count)|_1 to the objective via an epigraph.
 *
 * For each covered variable a, appends s >= 0 and the rows a - s + w1 = 0, -a - s + w2 = 0
 * with slacks w1, w2 >= 0, i.e. -s <= a <= s. New columns go after the existing ones in the
 * order s (count), w1 (count), w2 (count).
 */
LinearProgram l1_epigraph_augment(const LinearProgram& lp, Index first, Index count,
                                  double weight);

/// CPLEX LP text format, readable by most third-party solvers.
void write_lp_dump(std::ostream& os, const LinearProgram& lp);

}  // namespace ddempc
