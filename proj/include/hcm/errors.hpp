#pragma once

#include <stdexcept>
#include <string>

namespace hcm {

/// Invalid argument or configuration value (bad parameter ranges, non-physical networks).
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Configuration file or scenario could not be interpreted.
class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Inputs are well formed but leave the regime where the model is defined,
/// e.g. a Gaussian joint correlation |C| >= 1.
class ValidityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure did not reach its requested tolerance.
class ConvergenceError : public std::runtime_error {
public:
    ConvergenceError(const std::string& what, double achieved_error)
        : std::runtime_error(what), achieved_error_(achieved_error) {}

    double achieved_error() const noexcept { return achieved_error_; }

private:
    double achieved_error_;
};

}  // namespace hcm
