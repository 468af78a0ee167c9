// Exception types shared by the library

#pragma once

#include <stdexcept>
#include <string>

namespace entdist {

// Invalid arguments: non-finite frequencies, negative delays, unnormalised states, ...
class InputError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Base for everything that fails for numerical rather than contractual reasons.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// J(omega) evaluated exactly at an integrable band-edge singularity.
class DivergenceError : public NumericalError {
public:
    explicit DivergenceError(const std::string& what, double omega)
        : NumericalError(what), omega_(omega) {}
    double omega() const noexcept { return omega_; }

private:
    double omega_;
};

// Quadrature whose internal error estimate exceeds the requested tolerance.
class AccuracyError : public NumericalError {
public:
    AccuracyError(const std::string& what, double estimated_error)
        : NumericalError(what), estimated_error_(estimated_error) {}
    double estimated_error() const noexcept { return estimated_error_; }

private:
    double estimated_error_;
};

// Time stepper blew up (|b| grew past unitarity); retry with a smaller dt.
class InstabilityError : public NumericalError {
public:
    InstabilityError(const std::string& what, double time)
        : NumericalError(what), time_(time) {}
    double time() const noexcept { return time_; }

private:
    double time_;
};

// Config file / CLI problems. Line 0 means "not from a file".
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& what, int line = 0, std::string field = {})
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what),
          line_(line), field_(std::move(field)) {}
    int line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    int line_;
    std::string field_;
};

}  // namespace entdist
