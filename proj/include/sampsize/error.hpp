#pragma once

#include <stdexcept>
#include <string>

namespace sampsize {

// Base of every error thrown by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Inputs violate a documented precondition.
class DomainError : public Error {
public:
    using Error::Error;
};

// An iterative solver failed to reach its tolerance.
class SolverError : public Error {
public:
    SolverError(const std::string& what, double best_x, double best_value, int iterations)
        : Error(what + " (best x=" + std::to_string(best_x) + ", f=" + std::to_string(best_value) +
                ", iterations=" + std::to_string(iterations) + ")"),
          best_x_(best_x), best_value_(best_value), iterations_(iterations) {}

    double best_x() const noexcept { return best_x_; }
    double best_value() const noexcept { return best_value_; }
    int iterations() const noexcept { return iterations_; }

private:
    double best_x_;
    double best_value_;
    int iterations_;
};

// The requested design cannot be achieved (unbounded sample size, cap exceeded, ...).
class InfeasibleError : public Error {
public:
    using Error::Error;
};

// A metric has an empty denominator.
class UndefinedMetricError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(const std::string& what, int line)
        : Error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

    int line() const noexcept { return line_; }

private:
    int line_;
};

}  // namespace sampsize
