#pragma once

#include <stdexcept>
#include <string>

namespace flock {

// Bad argument values (negative radius, p < 2, shape mismatch, ...).
class ParameterError : public std::invalid_argument {
public:
    explicit ParameterError(const std::string& msg) : std::invalid_argument(msg) {}
};

// A time stepper produced a non-finite state; carries the offending time.
class IntegrationError : public std::runtime_error {
public:
    IntegrationError(const std::string& msg, double t)
        : std::runtime_error(msg + " at t=" + std::to_string(t)), time_(t) {}
    double time() const { return time_; }

private:
    double time_;
};

} // namespace flock
