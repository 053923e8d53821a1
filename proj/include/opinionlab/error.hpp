#pragma once

#include <stdexcept>
#include <string>

namespace opinionlab {

/// Invalid model, graph or feedback parameter.
class ParameterError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Shapes of states, matrices or inputs do not agree.
class DimensionError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// An analysis refused because a hypothesis of the underlying result fails.
class HypothesisError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Integration produced a non-finite state.
class NumericalError : public std::runtime_error {
public:
    NumericalError(const std::string& what, double last_finite_time)
        : std::runtime_error(what), last_finite_time_(last_finite_time) {}

    double last_finite_time() const noexcept { return last_finite_time_; }

private:
    double last_finite_time_;
};

/// Scenario document failed validation.
class SchemaError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

}  // namespace opinionlab
