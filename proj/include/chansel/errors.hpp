#pragma once

#include <stdexcept>
#include <string>

namespace chansel {

/// Input outside the mathematical domain of an operation (bad rate, gamma
/// outside (0,1), unsupported channel count, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A numerical solver failed to bracket or converge.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Policy evaluation hit a singular system (non-unichain policy or a
/// construction bug).
class EvaluationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Simulation configuration rejected before running.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline void require(bool ok, const std::string& what)
{
    if (!ok)
        throw DomainError(what);
}

} // namespace detail
} // namespace chansel
