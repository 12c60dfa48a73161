#pragma once

// Shared problem set-ups for the unit and acceptance tests.

#include "ddempc/builtin_plants.hpp"
#include "ddempc/empc.hpp"

namespace ddempc::fixture {

/// l = -y on the scalar plant, U = [-1, 1], Y = [-5, 5], L = 5, n = 1.
inline EmpcConfig scalar_config() {
    EmpcConfig cfg;
    cfg.horizon = 5;
    cfg.order = 1;
    cfg.beta = 10.0;
    cfg.input_box = BoxSet::symmetric(1, 1.0);
    cfg.output_box = BoxSet::symmetric(1, 5.0);
    cfg.cost = {Vecd::Zero(1), Vecd::Constant(1, -1.0)};
    return cfg;
}

inline DataTrajectoryd scalar_data(std::uint64_t seed = 7) {
    return generate_pe_data(scalar_test_plant(), 40, BoxSet::symmetric(1, 1.0), seed);
}

/// Extended state of the scalar plant sitting at the equilibrium (u, y) = (u_e, 2 u_e).
inline ExtendedState scalar_equilibrium_state(double ue) {
    return {Signald::Constant(1, 1, ue), Signald::Constant(1, 1, 2.0 * ue)};
}

/// Reactor experiment: N = 100 uniform samples on [-1, 1], L = 15, n = 3, l = -y_2,
/// U = [-3, 3], Y = [-5, 5]^2.
inline EmpcConfig reactor_config(double beta = 10.0) {
    EmpcConfig cfg;
    cfg.horizon = 15;
    cfg.order = 3;
    cfg.beta = beta;
    cfg.input_box = BoxSet::symmetric(1, 3.0);
    cfg.output_box = BoxSet::symmetric(2, 5.0);
    cfg.cost = {Vecd::Zero(1), (Vecd(2) << 0.0, -1.0).finished()};
    return cfg;
}

inline DataTrajectoryd reactor_data(std::uint64_t seed = 1) {
    return generate_pe_data(reactor_plant(), 100, BoxSet::symmetric(1, 1.0), seed);
}

/// Copy of the data carrying the recorded stage cost, for the data-driven cost mode.
inline DataTrajectoryd with_stage_cost(const DataTrajectoryd& data, const LinearCost& cost) {
    return data.with_cost([&](const auto& u, const auto& y) { return cost(u, y); });
}

inline EmpcConfig data_driven(EmpcConfig cfg) {
    cfg.cost_mode = CostMode::data_driven;
    return cfg;
}

}  // namespace ddempc::fixture
