#include "ddempc/receding_horizon.hpp"

#include <ostream>

#include "ddempc/dataset_csv.hpp"
#include "ddempc/json_io.hpp"

namespace ddempc {

PlantStart warm_up(const StateSpaced& plant, const Vecd& x0, const Signald& u_warmup, Index order) {
    if (u_warmup.cols() < order)
        throw ConfigError("warm_up: need at least n = " + std::to_string(order) + " warm-up inputs");
    const auto sim = simulate(plant, x0, u_warmup);
    PlantStart s;
    s.xi.u = sim.u.rightCols(order);
    s.xi.y = sim.y.rightCols(order);
    s.state = sim.x.col(sim.x.cols() - 1);
    return s;
}

ClosedLoopLog run_closed_loop(const StateSpaced& plant, const DataTrajectoryd& data,
                              const ExtendedState& xi0, const EmpcConfig& cfg, Index steps,
                              const ClosedLoopOptions& options) {
    PlantStart start{xi0, reconstruct_state(plant, xi0.u, xi0.y)};
    return run_closed_loop(plant, data, start, cfg, steps, options);
}

ClosedLoopLog run_closed_loop(const StateSpaced& plant, const DataTrajectoryd& data,
                              const PlantStart& start, const EmpcConfig& cfg, Index steps,
                              const ClosedLoopOptions& options) {
    if (steps < 1) throw ConfigError("run_closed_loop: T must be at least 1");
    if (plant.inputs() != data.inputs() || plant.outputs() != data.outputs())
        throw DimensionError("run_closed_loop: plant and data dimensions differ");
    if (start.state.size() != plant.states())
        throw DimensionError("run_closed_loop: plant state dimension mismatch");
    if (cfg.cost.l_u.size() != plant.inputs() || cfg.cost.l_y.size() != plant.outputs())
        throw DimensionError("run_closed_loop: stage cost needed to score the closed loop");

    ClosedLoopLog log;
    log.config = cfg;
    log.dataset_fingerprint = dataset_fingerprint(data);
    log.steps.reserve(static_cast<std::size_t>(steps));

    ExtendedState xi = start.xi;
    Vecd x = start.state;
    double l_bar = cfg.l_bar0 ? *cfg.l_bar0 : optimal_achievable_cost(data, xi, cfg);
    log.l_bar0 = l_bar;

    for (Index t = 0; t < steps; ++t) {
        const auto sol = solve_empc(data, xi, l_bar, cfg, options.solver);
        if (!sol.optimal()) {
            const std::string msg = "EMPC solve at t = " + std::to_string(t) +
                                    " returned status " + to_string(sol.status);
            if (t == 0) throw InitialInfeasibilityError(msg + "; xi_0 is outside the feasibility set");
            throw InvariantViolationError(msg + " after a feasible start");
        }
        ClosedLoopStep step;
        step.t = t;
        step.u = sol.first_input();
        step.y = plant.C * x + plant.D * step.u;
        if (options.measurement_hook) options.measurement_hook(t, step.y);
        x = plant.A * x + plant.B * step.u;
        step.stage_cost = cfg.cost(step.u, step.y);
        step.l_bar = l_bar;
        step.terminal_cost = sol.terminal_cost;
        step.objective = sol.objective_with_reg;
        step.status = sol.status;
        step.iterations = sol.iterations;
        log.steps.push_back(step);

        l_bar = sol.terminal_cost;
        xi.push(step.u, step.y);
    }
    return log;
}

double average_performance(const ClosedLoopLog& log, std::optional<Index> tail) {
    if (log.empty()) throw ConfigError("average_performance: empty log");
    const Index n = log.size();
    const Index count = tail ? std::clamp<Index>(*tail, 1, n) : n;
    double sum = 0.0;
    for (Index i = n - count; i < n; ++i) sum += log.steps[static_cast<std::size_t>(i)].stage_cost;
    return sum / static_cast<double>(count);
}

MonotonicityReport monotonicity_audit(const ClosedLoopLog& log, double tol) {
    MonotonicityReport r;
    for (std::size_t t = 1; t < log.steps.size(); ++t) {
        const double inc = log.steps[t].terminal_cost - log.steps[t - 1].terminal_cost;
        if (inc > r.max_violation) {
            r.max_violation = inc;
            r.worst_step = static_cast<Index>(t);
        }
    }
    r.ok = r.max_violation <= tol;
    return r;
}

double max_constraint_violation(const ClosedLoopLog& log) {
    double worst = 0.0;
    for (const auto& s : log.steps) {
        worst = std::max(worst, log.config.input_box.violation(s.u));
        worst = std::max(worst, log.config.output_box.violation(s.y));
    }
    return worst;
}

void write_log_csv(std::ostream& os, const ClosedLoopLog& log) {
    const Index m = log.config.input_box.channels(), p = log.config.output_box.channels();
    os << 't';
    for (Index i = 0; i < m; ++i) os << ",u_" << i + 1;
    for (Index i = 0; i < p; ++i) os << ",y_" << i + 1;
    os << ",stage_cost,l_bar,terminal_cost,objective,status\n";
    for (const auto& s : log.steps) {
        os << s.t;
        for (Index i = 0; i < m; ++i) os << ',' << format_number(s.u(i));
        for (Index i = 0; i < p; ++i) os << ',' << format_number(s.y(i));
        os << ',' << format_number(s.stage_cost) << ',' << format_number(s.l_bar) << ','
           << format_number(s.terminal_cost) << ',' << format_number(s.objective) << ','
           << to_string(s.status) << '\n';
    }
}

nlohmann::json summary_json(const ClosedLoopLog& log, Index tail) {
    const auto mono = monotonicity_audit(log);
    bool all_optimal = true;
    for (const auto& s : log.steps) all_optimal = all_optimal && s.status == LpStatus::optimal;
    char fp[17];
    std::snprintf(fp, sizeof fp, "%016llx", static_cast<unsigned long long>(log.dataset_fingerprint));
    nlohmann::json j;
    j["config"] = log.config;
    j["dataset_fingerprint"] = fp;
    j["steps"] = log.size();
    j["l_bar0"] = log.l_bar0;
    j["tail"] = std::min(tail, log.size());
    j["tail_average_cost"] = log.empty() ? 0.0 : average_performance(log, tail);
    j["average_cost"] = log.empty() ? 0.0 : average_performance(log);
    j["final_terminal_cost"] = log.empty() ? 0.0 : log.steps.back().terminal_cost;
    j["max_constraint_violation"] = max_constraint_violation(log);
    j["monotonicity_max_violation"] = mono.max_violation;
    j["monotone"] = mono.ok;
    j["all_optimal"] = all_optimal;
    return j;
}

}  // namespace ddempc
