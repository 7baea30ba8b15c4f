#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace irsnoma {

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Result exceeds the double range.
class OverflowError : public std::overflow_error {
public:
    using std::overflow_error::overflow_error;
};

/// An iterative or adaptive numerical routine did not converge within budget.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Invalid scenario or sweep configuration. `key()` names the offending field.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string key, const std::string& what)
        : std::runtime_error(what), key_(std::move(key)) {}

    const std::string& key() const noexcept { return key_; }

private:
    std::string key_;
};

} // namespace irsnoma
