#pragma once

#include <stdexcept>
#include <string>

namespace etm {

/// Argument outside the domain of a model function (negative base, singular power, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid configuration. `field` holds the dotted path of the offending entry.
class ConfigError : public std::runtime_error {
public:
    ConfigError(std::string field, const std::string& what)
        : std::runtime_error(field.empty() ? what : field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// A pivot block of the block-tridiagonal elimination was (numerically) singular.
class LinearSolveBreakdown : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace etm
