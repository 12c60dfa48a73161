#pragma once

#include <stdexcept>
#include <string>

namespace ddempc {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Matrix or signal shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Hankel depth exceeds the signal length.
class WindowTooLongError : public Error {
public:
    using Error::Error;
};

/// I - A is singular, so no unique equilibrium exists for a given input.
class MarginalEquilibriumError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class DataTooShortError : public Error {
public:
    using Error::Error;
};

class ExcitationError : public Error {
public:
    ExcitationError(const std::string& what, long required_order)
        : Error(what), required_order_(required_order) {}

    long required_order() const noexcept { return required_order_; }

private:
    long required_order_;
};

/// The first receding-horizon solve was infeasible: xi_0 is outside the feasibility set.
class InitialInfeasibilityError : public Error {
public:
    using Error::Error;
};

/// A solve after a feasible start failed. Recursive feasibility says this cannot happen
/// on exact data, so it points at a bug or a tolerance problem.
class InvariantViolationError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

}  // namespace ddempc
