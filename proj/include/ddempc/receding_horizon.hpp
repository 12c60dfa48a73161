#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include <json.hpp>

#include "ddempc/empc.hpp"

namespace ddempc {

struct ClosedLoopStep {
    Index t = 0;
    Vecd u;                      ///< applied input u_t = u_0*(t)
    Vecd y;                      ///< measured output y_t
    double stage_cost = 0.0;     ///< l(u_t, y_t)
    double l_bar = 0.0;          ///< bound used at time t
    double terminal_cost = 0.0;  ///< l(u_e*(t), y_e*(t))
    double objective = 0.0;      ///< LP objective including regularisation
    LpStatus status = LpStatus::optimal;
    Index iterations = 0;
};

struct ClosedLoopLog {
    std::vector<ClosedLoopStep> steps;
    EmpcConfig config;
    std::uint64_t dataset_fingerprint = 0;
    double l_bar0 = 0.0;

    bool empty() const { return steps.empty(); }
    Index size() const { return static_cast<Index>(steps.size()); }
};

/// Controller-side initial data together with the plant's true state at t = 0.
struct PlantStart {
    ExtendedState xi;
    Vecd state;
};

/// Runs the plant open loop from x0 for as many steps as u_warmup has columns; the last
/// `order` samples form xi_0.
PlantStart warm_up(const StateSpaced& plant, const Vecd& x0, const Signald& u_warmup, Index order);

struct ClosedLoopOptions {
    LpSolveFn solver = solve_lp;
    /// Called with (t, y_t) before y_t is fed back. Empty means exact measurements.
    std::function<void(Index, Vecd&)> measurement_hook;
};

/**
 * @brief Receding-horizon loop.
 *
 * At each t: solve the EMPC problem for (xi_t, l_bar(t)), apply u_0*, measure y_t from the
 * plant, set l_bar(t+1) to the optimal terminal cost and shift xi. l_bar(0) comes from
 * cfg.l_bar0 or, if unset, from optimal_achievable_cost(xi_0).
 *
 * @throws InitialInfeasibilityError if the first solve (or the l_bar(0) computation) fails.
 * @throws InvariantViolationError if a later solve is not optimal.
 */
ClosedLoopLog run_closed_loop(const StateSpaced& plant, const DataTrajectoryd& data,
                              const PlantStart& start, const EmpcConfig& cfg, Index steps,
                              const ClosedLoopOptions& options = {});

/// Overload that reconstructs the plant state from xi_0 (the plant must be observable
/// within n samples).
ClosedLoopLog run_closed_loop(const StateSpaced& plant, const DataTrajectoryd& data,
                              const ExtendedState& xi0, const EmpcConfig& cfg, Index steps,
                              const ClosedLoopOptions& options = {});

inline constexpr Index kDefaultTail = 20;

/// Mean realised stage cost over the whole log, or over its last `tail` steps.
double average_performance(const ClosedLoopLog& log, std::optional<Index> tail = std::nullopt);

struct MonotonicityReport {
    bool ok = true;
    double max_violation = 0.0;  ///< max_t terminal(t+1) - terminal(t), clipped at 0
    Index worst_step = -1;
};

MonotonicityReport monotonicity_audit(const ClosedLoopLog& log, double tol = 1e-8);

/// Largest excursion of any logged (u_t, y_t) outside the configured boxes.
double max_constraint_violation(const ClosedLoopLog& log);

/// `t,u_1..u_m,y_1..y_p,stage_cost,l_bar,terminal_cost,objective,status`
void write_log_csv(std::ostream& os, const ClosedLoopLog& log);

nlohmann::json summary_json(const ClosedLoopLog& log, Index tail = kDefaultTail);

}  // namespace ddempc
