#pragma once

#include <stdexcept>
#include <string>

namespace smoothagg {

/// Invalid configuration: bad sizes, out-of-range learning rates, unknown options.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// Mismatched vector lengths.
class DimensionError : public std::invalid_argument {
public:
    explicit DimensionError(const std::string& what) : std::invalid_argument(what) {}
};

/// Values outside their admissible domain (outcomes or forecasts outside [-B, B], ...).
class DomainError : public std::domain_error {
public:
    explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// Operation called out of protocol order, or duplicate expert birth.
class StateError : public std::logic_error {
public:
    explicit StateError(const std::string& what) : std::logic_error(what) {}
};

/// Relative entropy with q_i > 0 where p_i = 0.
class DivergenceError : public std::domain_error {
public:
    explicit DivergenceError(const std::string& what) : std::domain_error(what) {}
};

}  // namespace smoothagg
