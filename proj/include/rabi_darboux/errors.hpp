#pragma once

#include <stdexcept>
#include <string>

namespace rabi_darboux {

// Bad input: a violated precondition or type invariant.
class ValidationError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// The numbers went wrong: a pole, a step-size underflow, a degenerate solve.
class NumericError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class StepUnderflowError : public NumericError {
public:
    explicit StepUnderflowError(double at_time)
        : NumericError("step size underflow at t = " + std::to_string(at_time)),
          time_(at_time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class PoleError : public NumericError {
public:
    explicit PoleError(double at_time)
        : NumericError("pole in drive at t = " + std::to_string(at_time)),
          time_(at_time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {

inline void require(bool condition, const char* message) {
    if (!condition) throw ValidationError(message);
}

} // namespace detail

} // namespace rabi_darboux
