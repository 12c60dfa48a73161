#include <cmath>

#include "doctest.h"
#include "fixtures.hpp"

#include "ddempc/builtin_plants.hpp"
#include "ddempc/empc.hpp"

using namespace ddempc;
using namespace ddempc::fixture;

namespace {

// Best terminal cost reachable in L steps from state x0, written directly from the
// state-space model: y_k = C A^k x0 + sum_j C A^(k-1-j) B u_j.
double model_reachable_cost(const StateSpaced& sys, const Vecd& x0, const EmpcConfig& cfg) {
    const Index m = sys.inputs(), p = sys.outputs(), L = cfg.horizon, n = cfg.order;
    LpBuilder b;
    const Index u0 = b.variables();
    for (Index k = 0; k <= L; ++k)
        for (Index j = 0; j < m; ++j) b.add_variable("u", cfg.input_box.lower(j), cfg.input_box.upper(j));
    const Index y0 = b.variables();
    for (Index k = 0; k <= L; ++k)
        for (Index j = 0; j < p; ++j) b.add_variable("y", cfg.output_box.lower(j), cfg.output_box.upper(j));
    const Index ue = b.add_variables(m, "ue", -kInf, kInf);
    const Index ye = b.add_variables(p, "ye", -kInf, kInf);
    for (Index j = 0; j < m; ++j) b.set_cost(ue + j, cfg.cost.l_u(j));
    for (Index j = 0; j < p; ++j) b.set_cost(ye + j, cfg.cost.l_y(j));

    Matd Ak = Matd::Identity(sys.states(), sys.states());
    std::vector<Matd> markov;  // C A^i B
    for (Index k = 0; k <= L; ++k) {
        const Vecd free = sys.C * Ak * x0;
        for (Index i = 0; i < p; ++i) {
            const Index row = b.add_empty_row(free(i));
            b.add_entry(row, y0 + k * p + i, 1.0);
            for (Index j = 0; j < k; ++j) {
                const Matd& g = markov[static_cast<std::size_t>(k - 1 - j)];
                for (Index c = 0; c < m; ++c) b.add_entry(row, u0 + j * m + c, -g(i, c));
            }
            for (Index c = 0; c < m; ++c) b.add_entry(row, u0 + k * m + c, -sys.D(i, c));
        }
        markov.push_back(sys.C * Ak * sys.B);
        Ak = sys.A * Ak;
    }
    for (Index k = L - n; k <= L; ++k) {
        for (Index j = 0; j < m; ++j) b.add_row({{u0 + k * m + j, 1.0}, {ue + j, -1.0}}, 0.0);
        for (Index j = 0; j < p; ++j) b.add_row({{y0 + k * p + j, 1.0}, {ye + j, -1.0}}, 0.0);
    }
    const auto r = solve_lp(b.build());
    REQUIRE(r.optimal());
    return r.objective;
}

}  // namespace

TEST_CASE("EmpcConfig::validate") {
    auto cfg = scalar_config();
    CHECK_NOTHROW(cfg.validate(1, 1));
    CHECK(cfg.required_pe_order() == 8);
    cfg.horizon = 0;
    CHECK_THROWS_AS(cfg.validate(1, 1), ConfigError);
    cfg = scalar_config();
    cfg.beta = 0.0;
    CHECK_THROWS_AS(cfg.validate(1, 1), ConfigError);
    cfg = scalar_config();
    CHECK_THROWS_AS(cfg.validate(2, 1), DimensionError);
    cfg.input_box = BoxSet::unbounded(1);
    CHECK_THROWS_AS(cfg.validate(1, 1), ConfigError);
}

TEST_CASE("ExtendedState::push shifts the window") {
    auto xi = ExtendedState::zeros(3, 1, 1);
    xi.push(Vecd::Constant(1, 1.0), Vecd::Constant(1, 2.0));
    xi.push(Vecd::Constant(1, 3.0), Vecd::Constant(1, 4.0));
    CHECK(xi.u == (Signald(1, 3) << 0, 1, 3).finished());
    CHECK(xi.y == (Signald(1, 3) << 0, 2, 4).finished());
}

TEST_CASE("scalar plant: optimal artificial equilibrium") {
    const auto data = scalar_data();
    const auto cfg = scalar_config();
    const auto plant = scalar_test_plant();

    // Both start from x_0 = 2, so (1, 2) is reachable.
    for (const auto& xi : {scalar_equilibrium_state(1.0),
                           ExtendedState{Signald::Zero(1, 1), Signald::Constant(1, 1, 4.0)}}) {
        const auto sol = solve_empc(data, xi, 0.0, cfg);
        REQUIRE(sol.optimal());
        CHECK(sol.ue(0) == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(sol.ye(0) == doctest::Approx(2.0).epsilon(1e-8));
        CHECK(sol.terminal_cost == doctest::Approx(-2.0).epsilon(1e-8));

        SUBCASE("solution window is a plant trajectory") {
            CHECK(trajectory_residual(plant, sol.u, sol.y) < 1e-7);
            CHECK((sol.u.leftCols(1) - xi.u).cwiseAbs().maxCoeff() < 1e-9);
            CHECK((sol.y.leftCols(1) - xi.y).cwiseAbs().maxCoeff() < 1e-9);
        }
        SUBCASE("terminal pair repeated is an equilibrium trajectory") {
            const Index w = cfg.order + 1;
            CHECK(trajectory_residual(plant, sol.ue.replicate(1, w), sol.ye.replicate(1, w)) < 1e-7);
        }
        SUBCASE("predictions stay in the boxes") {
            for (Index k = cfg.order; k < sol.u.cols(); ++k) {
                CHECK(cfg.input_box.violation(sol.u.col(k)) < 1e-9);
                CHECK(cfg.output_box.violation(sol.y.col(k)) < 1e-9);
            }
        }
    }
}

TEST_CASE("terminal-cost bound below every equilibrium is infeasible") {
    const auto data = scalar_data();
    const auto cfg = scalar_config();
    const auto xi = scalar_equilibrium_state(1.0);
    CHECK(solve_empc(data, xi, -1e6, cfg).status == LpStatus::infeasible);
    CHECK(solve_empc(data, xi, -2.0 - 1e-3, cfg).status == LpStatus::infeasible);
    CHECK(diagnose_infeasibility(data, xi, -2.5, cfg) == ConstraintFamily::terminal_cost_bound);
    CHECK(diagnose_infeasibility(data, xi, 0.0, cfg) == ConstraintFamily::none);
    CHECK(std::string(to_string(ConstraintFamily::terminal_cost_bound)) == "terminal-cost-bound");
}

TEST_CASE("diagnose_infeasibility: unreachable equilibrium") {
    // y_(-1) = 40 forces y_0 = 20, outside the output box.
    const auto data = scalar_data();
    auto cfg = scalar_config();
    const ExtendedState xi{Signald::Zero(1, 1), Signald::Constant(1, 1, 40.0)};
    CHECK(diagnose_infeasibility(data, xi, 0.0, cfg) == ConstraintFamily::initial_condition);
    CHECK_THROWS_AS(optimal_achievable_cost(data, xi, cfg), InitialInfeasibilityError);
}

TEST_CASE("reachability LP") {
    const auto data = scalar_data();
    const auto cfg = scalar_config();
    const auto xi = scalar_equilibrium_state(1.0);
    CHECK(enumerate_reachability_lp(data, xi, cfg, cfg.cost) == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(optimal_achievable_cost(data, xi, cfg) == doctest::Approx(-2.0).epsilon(1e-9));
    CHECK(std::abs(enumerate_reachability_lp(data, xi, cfg, LinearCost::zero(1, 1))) < 1e-12);

    SUBCASE("probe = +y finds the lowest reachable equilibrium") {
        const LinearCost up{Vecd::Zero(1), Vecd::Ones(1)};
        // u = -1 from x_0 = 2 gives x_k = -2 + 4 * 0.5^k; the window closes at k = L - 1 = 4.
        CHECK(enumerate_reachability_lp(data, xi, cfg, up) == doctest::Approx(-1.75).epsilon(1e-9));
    }
    SUBCASE("from rest the optimum is approached but not reached") {
        // x_k <= 2 (1 - 0.5^k) under |u| <= 1, so the best equilibrium reachable with
        // y_(L-1) = y_L is y_e = 2 (1 - 0.5^(L-1)).
        const double expect = -2.0 * (1.0 - std::pow(0.5, static_cast<double>(cfg.horizon - 1)));
        const double got = optimal_achievable_cost(data, ExtendedState::zeros(1, 1, 1), cfg);
        CHECK(got == doctest::Approx(expect).epsilon(1e-9));
    }
    SUBCASE("dimension mismatch") {
        CHECK_THROWS_AS(enumerate_reachability_lp(data, xi, cfg, LinearCost::zero(2, 1)),
                        DimensionError);
    }
}

TEST_CASE("reactor: optimal achievable cost from rest") {
    const auto data = reactor_data();
    const auto cfg = reactor_config();
    const auto xi = ExtendedState::zeros(3, 1, 2);
    const double l0 = optimal_achievable_cost(data, xi, cfg);
    // Reference value from an independent interior-point solve of the same LP.
    CHECK(l0 == doctest::Approx(-0.355050434381).epsilon(1e-9));
    CHECK(l0 == doctest::Approx(model_reachable_cost(reactor_plant(), Vecd::Zero(3), cfg)).epsilon(1e-7));
    // The optimal equilibrium itself is not reachable in L steps from rest.
    CHECK(l0 > -0.6382);
}

TEST_CASE("model_based_optimal_equilibrium") {
    const auto scfg = scalar_config();
    const auto s = model_based_optimal_equilibrium(scalar_test_plant(), scfg.input_box,
                                                   scfg.output_box, scfg.cost);
    CHECK(s.u(0) == doctest::Approx(1.0));
    CHECK(s.y(0) == doctest::Approx(2.0));
    CHECK(s.cost == doctest::Approx(-2.0));

    const auto rcfg = reactor_config();
    const auto r = model_based_optimal_equilibrium(reactor_plant(), rcfg.input_box,
                                                   rcfg.output_box, rcfg.cost);
    CHECK(std::abs(r.u(0) - 0.3899) < 2e-3);
    CHECK(std::abs(r.cost + 0.6396) < 2e-3);
    CHECK(std::abs(r.y(0) + 5.0) < 2e-3);

    const auto z = model_based_optimal_equilibrium(reactor_plant(), rcfg.input_box, rcfg.output_box,
                                                   LinearCost::zero(1, 2));
    CHECK(z.cost == 0.0);
    CHECK_THROWS_AS(model_based_optimal_equilibrium(reactor_plant(), rcfg.input_box,
                                                    rcfg.output_box, scfg.cost),
                    DimensionError);
}

TEST_CASE("data-driven cost mode matches the known-cost problem") {
    SUBCASE("scalar plant") {
        const auto cfg = scalar_config();
        const auto data = with_stage_cost(scalar_data(), cfg.cost);
        for (const auto& xi : {scalar_equilibrium_state(0.25), scalar_equilibrium_state(-1.0)}) {
            const double lbar = optimal_achievable_cost(data, xi, cfg);
            CHECK(optimal_achievable_cost(data, xi, data_driven(cfg)) == doctest::Approx(lbar).epsilon(1e-9));
            const auto known = solve_empc(data, xi, lbar, cfg);
            const auto dd = solve_empc(data, xi, lbar, data_driven(cfg));
            REQUIRE(known.optimal());
            REQUIRE(dd.optimal());
            CHECK(std::abs(known.objective_with_reg - dd.objective_with_reg) < 1e-6);
            CHECK(std::abs(known.objective - dd.objective) < 1e-6);
            CHECK(std::abs(known.terminal_cost - dd.terminal_cost) < 1e-6);
        }
    }
    SUBCASE("reactor") {
        const auto cfg = reactor_config();
        const auto data = with_stage_cost(reactor_data(), cfg.cost);
        const auto xi = ExtendedState::zeros(3, 1, 2);
        const double lbar = optimal_achievable_cost(data, xi, cfg);
        const auto known = solve_empc(data, xi, lbar, cfg);
        const auto dd = solve_empc(data, xi, lbar, data_driven(cfg));
        REQUIRE(known.optimal());
        REQUIRE(dd.optimal());
        CHECK(std::abs(known.objective_with_reg - dd.objective_with_reg) < 1e-6);
    }
    SUBCASE("predicted cost never reads the explicit cost") {
        auto cfg = data_driven(scalar_config());
        const auto data = with_stage_cost(scalar_data(), cfg.cost);
        const auto xi = scalar_equilibrium_state(0.25);
        const auto ref = solve_empc(data, xi, 0.0, cfg);
        cfg.cost = {Vecd::Constant(1, 123.0), Vecd::Constant(1, 7.0)};
        const auto other = solve_empc(data, xi, 0.0, cfg);
        CHECK(ref.objective_with_reg == other.objective_with_reg);
    }
    SUBCASE("zero cost samples leave only the regulariser") {
        const auto cfg = data_driven(scalar_config());
        const auto data = scalar_data().with_cost([](const auto&, const auto&) { return 0.0; });
        const auto sol = solve_empc(data, scalar_equilibrium_state(0.5), 0.0, cfg);
        REQUIRE(sol.optimal());
        CHECK(std::abs(sol.objective) < 1e-9);
        CHECK(sol.objective_with_reg == doctest::Approx(cfg.alpha_reg * sol.alpha.lpNorm<1>()));
    }
    SUBCASE("missing cost column") {
        CHECK_THROWS_AS(solve_empc(scalar_data(), scalar_equilibrium_state(0.0), 0.0,
                                   data_driven(scalar_config())),
                        ConfigError);
    }
}

TEST_CASE("larger beta never worsens the terminal cost") {
    const auto data = reactor_data();
    const auto xi = ExtendedState::zeros(3, 1, 2);
    const double lbar = 0.0;
    double previous = kInf;
    for (double beta : {0.5, 1.0, 10.0, 100.0, 1000.0}) {
        const auto sol = solve_empc(data, xi, lbar, reactor_config(beta));
        REQUIRE(sol.optimal());
        CHECK(sol.terminal_cost <= previous + 1e-8);
        previous = sol.terminal_cost;
    }
}

TEST_CASE("fixing the terminal equilibrium can only raise the objective") {
    const auto cfg = scalar_config();
    const auto data = scalar_data();
    const auto oe = model_based_optimal_equilibrium(scalar_test_plant(), cfg.input_box,
                                                    cfg.output_box, cfg.cost);
    for (const auto& xi : {scalar_equilibrium_state(1.0),
                           ExtendedState{Signald::Constant(1, 1, -1.0), Signald::Constant(1, 1, 6.0)}}) {
        const auto general = build_empc_lp(data, xi, 0.0, cfg);
        const auto fixed = fix_terminal_equilibrium(general, oe.u, oe.y);
        const auto a = extract_solution(general, solve_lp(general.lp), cfg);
        const auto b = extract_solution(fixed, solve_lp(fixed.lp), cfg);
        REQUIRE(a.optimal());
        REQUIRE(b.optimal());
        CHECK(b.objective_with_reg >= a.objective_with_reg - 1e-9);
        CHECK(b.ue(0) == oe.u(0));
    }
    CHECK_THROWS_AS(fix_terminal_equilibrium(build_empc_lp(data, scalar_equilibrium_state(0.0), 0.0, cfg),
                                             Vecd::Zero(2), Vecd::Zero(1)),
                    DimensionError);
}

TEST_CASE("program layout") {
    const auto cfg = scalar_config();
    const auto data = scalar_data();
    const auto prog = build_empc_lp(data, scalar_equilibrium_state(0.0), 0.0, cfg);
    const auto& lay = prog.layout;
    CHECK(lay.window() == 7);
    CHECK(lay.alpha_count == 40 - 5 - 1);
    CHECK(lay.u_at(-1, 0) == lay.u);
    CHECK(prog.lp.names[static_cast<std::size_t>(lay.u_at(0, 0))] == "u[0,0]");
    CHECK(prog.lp.lower(lay.u_at(-1, 0)) == -kInf);
    CHECK(prog.lp.upper(lay.u_at(2, 0)) == 1.0);
    CHECK(lay.abs_alpha >= 0);
    CHECK(lay.cost == -1);

    auto no_reg = cfg;
    no_reg.alpha_reg = 0.0;
    CHECK(build_empc_lp(data, scalar_equilibrium_state(0.0), 0.0, no_reg).layout.abs_alpha == -1);
    CHECK_THROWS_AS(build_empc_lp(data, scalar_equilibrium_state(0.0), 0.0, data_driven(cfg)),
                    ConfigError);
}

TEST_CASE("data requirements") {
    const auto cfg = scalar_config();
    const auto xi = scalar_equilibrium_state(0.0);
    SUBCASE("too short") {
        const auto data = generate_pe_data(scalar_test_plant(), 6, BoxSet::symmetric(1, 1.0), 3);
        CHECK_THROWS_AS(build_empc_lp(data, xi, 0.0, cfg), DataTooShortError);
    }
    SUBCASE("not exciting enough") {
        const DataTrajectoryd data(Signald::Ones(1, 40), Signald::Constant(1, 40, 2.0));
        try {
            build_empc_lp(data, xi, 0.0, cfg);
            FAIL("expected ExcitationError");
        } catch (const ExcitationError& e) {
            CHECK(e.required_order() == 8);
        }
    }
    SUBCASE("horizon shorter than the order") {
        auto c = cfg;
        c.order = 2;
        c.horizon = 1;
        CHECK_THROWS_AS(build_empc_lp(scalar_data(), ExtendedState::zeros(2, 1, 1), 0.0, c), ConfigError);
    }
    SUBCASE("extended state of the wrong length") {
        CHECK_THROWS_AS(build_empc_lp(scalar_data(), ExtendedState::zeros(2, 1, 1), 0.0, cfg),
                        DimensionError);
    }
}
