#pragma once

#include <stdexcept>
#include <string>

namespace fmci {

// Argument outside the mathematical domain of a function.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// An iterative solver exhausted its budget. Carries the best iterate seen.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double best)
        : std::runtime_error(what), best_(best) {}
    double best() const noexcept { return best_; }

private:
    double best_;
};

// Out-of-range sketch parameters.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// No 1-bit found in a hash stream within its capacity.
class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Sketches with different parameters or hash schemes cannot be merged.
class MergeError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed sketch file.
class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace fmci
