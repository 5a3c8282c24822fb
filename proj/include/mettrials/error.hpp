#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mettrials {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Raised when an input violates a type invariant (non-PD matrix, weights off
// the simplex, J smaller than the support, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Ill-conditioned systems and solver failures.
class NumericalError : public Error {
public:
    using Error::Error;
};

class BudgetExceededError : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    ConfigError(std::string path, const std::string& what)
        : Error(path.empty() ? what : path + ": " + what), path_(std::move(path)) {}

    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

}  // namespace mettrials
