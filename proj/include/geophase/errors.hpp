#pragma once

#include <stdexcept>
#include <string>

namespace geophase {

// Malformed configuration or command usage.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Arguments outside the validity region of a model or operation
// (e.g. XZ - Y^2 <= 0, negative polynomial order, action out of range).
class DomainError : public std::runtime_error {
public:
    explicit DomainError(const std::string& what) : std::runtime_error(what) {}
};

// A computation on valid inputs failed to reach its accuracy target
// (quadrature support, gap collapse, aliasing, adiabaticity loss, ...).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace geophase
