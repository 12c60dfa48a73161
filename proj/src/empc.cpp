#include "ddempc/empc.hpp"

#include <string>

namespace ddempc {

void EmpcConfig::validate(Index m, Index p) const {
    if (order < 1) throw ConfigError("EmpcConfig: order n must be at least 1");
    if (horizon < order)
        throw ConfigError("EmpcConfig: horizon L = " + std::to_string(horizon) +
                          " must be at least n = " + std::to_string(order));
    if (!(beta > 0)) throw ConfigError("EmpcConfig: beta must be positive");
    if (!(alpha_reg >= 0)) throw ConfigError("EmpcConfig: alpha_reg must be nonnegative");
    if (input_box.channels() != m || output_box.channels() != p)
        throw DimensionError("EmpcConfig: box dimensions do not match the data");
    if (!input_box.bounded()) throw ConfigError("EmpcConfig: the input box must be bounded");
    if (cost_mode == CostMode::known && (cost.l_u.size() != m || cost.l_y.size() != p))
        throw DimensionError("EmpcConfig: stage cost dimensions do not match the data");
    if (l_bar0 && !std::isfinite(*l_bar0)) throw ConfigError("EmpcConfig: l_bar0 must be finite");
}

namespace {

enum class Objective { empc, probe_explicit, probe_predicted };

struct BuildSpec {
    bool initial_condition = true;
    bool terminal_window = true;
    bool cost_bound = true;
    bool regularize = true;
    bool predicted_cost = false;  // include the cost Hankel rows
    Objective objective = Objective::empc;
    LinearCost probe;
    double l_bar = 0.0;
};

void check_data(const DataTrajectoryd& data, const ExtendedState& xi, const EmpcConfig& cfg) {
    cfg.validate(data.inputs(), data.outputs());
    if (xi.u.rows() != data.inputs() || xi.y.rows() != data.outputs() ||
        xi.u.cols() != cfg.order || xi.y.cols() != cfg.order)
        throw DimensionError("extended state must hold n = " + std::to_string(cfg.order) +
                             " samples of matching input/output dimension");
    const Index depth = cfg.horizon + cfg.order + 1;
    if (data.length() < depth)
        throw DataTooShortError("data has " + std::to_string(data.length()) +
                                " samples, the predictor needs at least L + n + 1 = " +
                                std::to_string(depth));
    const Index order = cfg.required_pe_order();
    const auto pe = is_persistently_exciting(data.u(), order, cfg.pe_tol);
    if (!pe.exciting)
        throw ExcitationError("input data is not persistently exciting of order L + 2n + 1 = " +
                                  std::to_string(order) + " (rank " + std::to_string(pe.rank) +
                                  " of " + std::to_string(pe.required_rank) + ")",
                              static_cast<long>(order));
}

EmpcProgram compile(const DataTrajectoryd& data, const ExtendedState& xi, const EmpcConfig& cfg,
                    const BuildSpec& spec) {
    check_data(data, xi, cfg);
    if (spec.predicted_cost && !data.has_cost())
        throw ConfigError("data-driven cost mode needs recorded cost samples");

    const Index m = data.inputs(), p = data.outputs(), n = cfg.order, L = cfg.horizon;
    const auto pred = stacked_predictor(data, L, n, spec.predicted_cost);
    const Index W = pred.depth, K = pred.cols();

    EmpcLayout lay;
    lay.m = m;
    lay.p = p;
    lay.order = n;
    lay.horizon = L;

    LpBuilder b;
    lay.alpha = b.add_variables(K, "alpha", -kInf, kInf);
    lay.alpha_count = K;
    lay.u = b.variables();
    for (Index k = -n; k <= L; ++k)
        for (Index j = 0; j < m; ++j) {
            const bool boxed = k >= 0;
            b.add_variable("u[" + std::to_string(k) + "," + std::to_string(j) + "]",
                           boxed ? cfg.input_box.lower(j) : -kInf,
                           boxed ? cfg.input_box.upper(j) : kInf);
        }
    lay.y = b.variables();
    for (Index k = -n; k <= L; ++k)
        for (Index j = 0; j < p; ++j) {
            const bool boxed = k >= 0;
            b.add_variable("y[" + std::to_string(k) + "," + std::to_string(j) + "]",
                           boxed ? cfg.output_box.lower(j) : -kInf,
                           boxed ? cfg.output_box.upper(j) : kInf);
        }
    lay.ue = b.add_variables(m, "ue", -kInf, kInf);
    lay.ye = b.add_variables(p, "ye", -kInf, kInf);
    if (spec.predicted_cost) lay.cost = b.add_variables(W, "l", -kInf, kInf);

    // Trajectory parameterisation: w - H alpha = 0, one row per predicted entry.
    const auto add_hankel_rows = [&](Index first_var, const auto& hankel_rows) {
        for (Index r = 0; r < hankel_rows.rows(); ++r) {
            const Index row = b.add_empty_row(0.0);
            b.add_entry(row, first_var + r, 1.0);
            for (Index c = 0; c < K; ++c) b.add_entry(row, lay.alpha + c, -hankel_rows(r, c));
        }
    };
    add_hankel_rows(lay.u, pred.inputs());
    add_hankel_rows(lay.y, pred.outputs());
    if (spec.predicted_cost) add_hankel_rows(lay.cost, pred.costs());

    if (spec.initial_condition) {
        for (Index k = -n; k < 0; ++k) {
            for (Index j = 0; j < m; ++j) b.add_row({{lay.u_at(k, j), 1.0}}, xi.u(j, k + n));
            for (Index j = 0; j < p; ++j) b.add_row({{lay.y_at(k, j), 1.0}}, xi.y(j, k + n));
        }
    }

    if (spec.terminal_window) {
        for (Index k = L - n; k <= L; ++k) {
            for (Index j = 0; j < m; ++j) b.add_row({{lay.u_at(k, j), 1.0}, {lay.ue + j, -1.0}}, 0.0);
            for (Index j = 0; j < p; ++j) b.add_row({{lay.y_at(k, j), 1.0}, {lay.ye + j, -1.0}}, 0.0);
        }
    }

    // Terminal stage cost as a linear form over the LP variables.
    std::vector<std::pair<Index, double>> terminal;
    if (spec.predicted_cost) {
        terminal.emplace_back(lay.cost_at(L), 1.0);
    } else {
        const LinearCost& l = spec.objective == Objective::probe_explicit ? spec.probe : cfg.cost;
        for (Index j = 0; j < m; ++j) terminal.emplace_back(lay.ue + j, l.l_u(j));
        for (Index j = 0; j < p; ++j) terminal.emplace_back(lay.ye + j, l.l_y(j));
    }

    if (spec.cost_bound) {
        lay.bound_slack = b.add_variable("lbar_slack", 0.0, kInf);
        auto row = terminal;
        row.emplace_back(lay.bound_slack, 1.0);
        b.add_row(row, spec.l_bar);
    }

    if (spec.objective == Objective::empc) {
        for (Index k = 0; k < L; ++k) {
            if (spec.predicted_cost) {
                b.add_cost(lay.cost_at(k), 1.0);
            } else {
                for (Index j = 0; j < m; ++j) b.add_cost(lay.u_at(k, j), cfg.cost.l_u(j));
                for (Index j = 0; j < p; ++j) b.add_cost(lay.y_at(k, j), cfg.cost.l_y(j));
            }
        }
        for (const auto& [col, v] : terminal) b.add_cost(col, cfg.beta * v);
    } else {
        for (const auto& [col, v] : terminal) b.add_cost(col, v);
    }

    EmpcProgram prog{b.build(), lay};
    if (spec.regularize && cfg.alpha_reg > 0) {
        prog.layout.abs_alpha = prog.lp.variables();
        prog.lp = l1_epigraph_augment(prog.lp, lay.alpha, K, cfg.alpha_reg);
    }
    return prog;
}

}  // namespace

EmpcProgram build_empc_lp(const DataTrajectoryd& data, const ExtendedState& xi, double l_bar,
                          const EmpcConfig& cfg) {
    if (cfg.cost_mode != CostMode::known)
        throw ConfigError("build_empc_lp: configuration is in data-driven cost mode");
    BuildSpec spec;
    spec.l_bar = l_bar;
    return compile(data, xi, cfg, spec);
}

EmpcProgram build_empc_lp_unknown_cost(const DataTrajectoryd& data, const ExtendedState& xi,
                                       double l_bar, const EmpcConfig& cfg) {
    if (!data.has_cost())
        throw ConfigError("build_empc_lp_unknown_cost: data has no cost trajectory");
    BuildSpec spec;
    spec.l_bar = l_bar;
    spec.predicted_cost = true;
    // The explicit cost is irrelevant here; validate() only checks it in known mode.
    EmpcConfig c = cfg;
    c.cost_mode = CostMode::data_driven;
    return compile(data, xi, c, spec);
}

EmpcProgram build_empc_program(const DataTrajectoryd& data, const ExtendedState& xi,
                               double l_bar, const EmpcConfig& cfg) {
    return cfg.cost_mode == CostMode::known ? build_empc_lp(data, xi, l_bar, cfg)
                                            : build_empc_lp_unknown_cost(data, xi, l_bar, cfg);
}

EmpcProgram fix_terminal_equilibrium(EmpcProgram program, const Vecd& ue, const Vecd& ye) {
    const auto& lay = program.layout;
    if (ue.size() != lay.m || ye.size() != lay.p)
        throw DimensionError("fix_terminal_equilibrium: dimension mismatch");
    for (Index j = 0; j < lay.m; ++j) program.lp.lower(lay.ue + j) = program.lp.upper(lay.ue + j) = ue(j);
    for (Index j = 0; j < lay.p; ++j) program.lp.lower(lay.ye + j) = program.lp.upper(lay.ye + j) = ye(j);
    return program;
}

EmpcSolution extract_solution(const EmpcProgram& program, const LpResult& result,
                              const EmpcConfig& cfg) {
    const auto& lay = program.layout;
    EmpcSolution s;
    s.status = result.status;
    s.iterations = result.iterations;
    s.order = lay.order;
    if (result.x.size() != program.lp.variables()) return s;
    const Vecd& x = result.x;
    const Index W = lay.window();
    s.alpha = x.segment(lay.alpha, lay.alpha_count);
    s.u = unstack(x.segment(lay.u, W * lay.m), lay.m);
    s.y = unstack(x.segment(lay.y, W * lay.p), lay.p);
    s.ue = x.segment(lay.ue, lay.m);
    s.ye = x.segment(lay.ye, lay.p);
    double running = 0.0;
    if (lay.cost >= 0) {
        s.terminal_cost = x(lay.cost_at(lay.horizon));
        for (Index k = 0; k < lay.horizon; ++k) running += x(lay.cost_at(k));
    } else {
        s.terminal_cost = cfg.cost(s.ue, s.ye);
        for (Index k = 0; k < lay.horizon; ++k) running += cfg.cost(s.u.col(k + lay.order), s.y.col(k + lay.order));
    }
    s.objective = running + cfg.beta * s.terminal_cost;
    s.objective_with_reg = result.objective;
    return s;
}

EmpcSolution solve_empc(const DataTrajectoryd& data, const ExtendedState& xi, double l_bar,
                        const EmpcConfig& cfg, const LpSolveFn& solver) {
    const auto program = build_empc_program(data, xi, l_bar, cfg);
    return extract_solution(program, solver(program.lp, cfg.lp), cfg);
}

namespace {

double solve_reachability(const DataTrajectoryd& data, const ExtendedState& xi,
                          const EmpcConfig& cfg, const BuildSpec& spec) {
    const auto prog = compile(data, xi, cfg, spec);
    const auto r = solve_lp(prog.lp, cfg.lp);
    switch (r.status) {
        case LpStatus::optimal: return r.objective;
        case LpStatus::infeasible:
            throw InitialInfeasibilityError(
                "no equilibrium is reachable in L = " + std::to_string(cfg.horizon) +
                " steps from the given extended state");
        case LpStatus::unbounded:
            throw Error("reachable stage cost is unbounded below; bound the output box");
        default: throw Error("reachability LP failed numerically");
    }
}

}  // namespace

double enumerate_reachability_lp(const DataTrajectoryd& data, const ExtendedState& xi,
                                 const EmpcConfig& cfg, const LinearCost& probe) {
    if (probe.l_u.size() != data.inputs() || probe.l_y.size() != data.outputs())
        throw DimensionError("enumerate_reachability_lp: probe cost dimension mismatch");
    BuildSpec spec;
    spec.cost_bound = false;
    spec.regularize = false;
    spec.objective = Objective::probe_explicit;
    spec.probe = probe;
    EmpcConfig c = cfg;
    c.cost_mode = CostMode::known;
    c.cost = probe;
    return solve_reachability(data, xi, c, spec);
}

double optimal_achievable_cost(const DataTrajectoryd& data, const ExtendedState& xi,
                               const EmpcConfig& cfg) {
    if (cfg.cost_mode == CostMode::known) return enumerate_reachability_lp(data, xi, cfg, cfg.cost);
    if (!data.has_cost()) throw ConfigError("optimal_achievable_cost: data has no cost trajectory");
    BuildSpec spec;
    spec.cost_bound = false;
    spec.regularize = false;
    spec.predicted_cost = true;
    spec.objective = Objective::probe_predicted;
    return solve_reachability(data, xi, cfg, spec);
}

OptimalEquilibrium model_based_optimal_equilibrium(const StateSpaced& sys, const BoxSet& input_box,
                                                   const BoxSet& output_box, const LinearCost& cost) {
    const Index m = sys.inputs(), p = sys.outputs();
    if (input_box.channels() != m || output_box.channels() != p || cost.l_u.size() != m ||
        cost.l_y.size() != p)
        throw DimensionError("model_based_optimal_equilibrium: dimension mismatch");
    const Matd gain = dc_gain(sys);
    LpBuilder b;
    const Index u0 = b.variables();
    for (Index j = 0; j < m; ++j)
        b.add_variable("ue[" + std::to_string(j) + "]", input_box.lower(j), input_box.upper(j), cost.l_u(j));
    const Index y0 = b.variables();
    for (Index j = 0; j < p; ++j)
        b.add_variable("ye[" + std::to_string(j) + "]", output_box.lower(j), output_box.upper(j), cost.l_y(j));
    for (Index i = 0; i < p; ++i) {
        const Index row = b.add_empty_row(0.0);
        b.add_entry(row, y0 + i, 1.0);
        for (Index j = 0; j < m; ++j) b.add_entry(row, u0 + j, -gain(i, j));
    }
    const auto r = solve_lp(b.build());
    if (r.status == LpStatus::unbounded) throw Error("optimal equilibrium cost is unbounded below");
    if (r.status != LpStatus::optimal) throw Error("no admissible equilibrium inside the boxes");
    return {r.x.segment(u0, m), r.x.segment(y0, p), r.objective};
}

const char* to_string(ConstraintFamily f) {
    switch (f) {
        case ConstraintFamily::none: return "none";
        case ConstraintFamily::initial_condition: return "initial-condition";
        case ConstraintFamily::terminal_equilibrium: return "terminal-equilibrium";
        case ConstraintFamily::terminal_cost_bound: return "terminal-cost-bound";
    }
    return "unknown";
}

ConstraintFamily diagnose_infeasibility(const DataTrajectoryd& data, const ExtendedState& xi,
                                        double l_bar, const EmpcConfig& cfg) {
    BuildSpec spec;
    spec.l_bar = l_bar;
    spec.regularize = false;
    spec.predicted_cost = cfg.cost_mode == CostMode::data_driven;
    const auto feasible = [&](bool terminal, bool bound) {
        BuildSpec s = spec;
        s.terminal_window = terminal;
        s.cost_bound = bound;
        const auto prog = compile(data, xi, cfg, s);
        auto lp = prog.lp;
        lp.c.setZero();
        return solve_lp(lp, cfg.lp).status != LpStatus::infeasible;
    };
    if (!feasible(false, false)) return ConstraintFamily::initial_condition;
    if (!feasible(true, false)) return ConstraintFamily::terminal_equilibrium;
    if (!feasible(true, true)) return ConstraintFamily::terminal_cost_bound;
    return ConstraintFamily::none;
}

}  // namespace ddempc
