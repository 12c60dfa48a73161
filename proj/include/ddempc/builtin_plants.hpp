#pragma once

#include <optional>
#include <string>

#include "ddempc/lti_plant.hpp"

namespace ddempc {

/// Scalar test plant x+ = 0.5 x + u, y = x.
inline StateSpaced scalar_test_plant() {
    return {Matd::Constant(1, 1, 0.5), Matd::Constant(1, 1, 1.0), Matd::Constant(1, 1, 1.0),
            Matd::Zero(1, 1)};
}

/// Linearised, discretised (Ts = 0.1 s) chemical reactor with three states, one input and
/// two measured states.
inline StateSpaced reactor_plant() {
    Matd A(3, 3), B(3, 1), C(2, 3);
    A << 0.7438, 0, -3.1180,
         0.0267, 0.9048, 0.4728,
         0, 0, 0.9048;
    B << -0.1666, 0.0253, 0.0952;
    C << 1, 0, 0,
         0, 1, 0;
    return {A, B, C, Matd::Zero(2, 1)};
}

inline std::optional<StateSpaced> builtin_plant(const std::string& name) {
    if (name == "reactor") return reactor_plant();
    if (name == "scalar_test") return scalar_test_plant();
    return std::nullopt;
}

}  // namespace ddempc
