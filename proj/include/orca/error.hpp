#pragma once

#include <stdexcept>
#include <string>

namespace orca {

// Base of every error thrown by the toolkit. The CLI maps the subclasses
// onto exit codes (config/domain -> 2, numerical -> 3).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
    virtual const char* kind() const noexcept { return "error"; }
};

// Input outside an operation's domain (negative field, C_ref = 0, ...).
class DomainError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "domain_error"; }
};

// Malformed structure, e.g. a manifold whose basis size is inconsistent.
class StructuralError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "structural_error"; }
};

// Eigensolver failure, step-size non-convergence and similar.
class NumericalError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "numerical_error"; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "config_error"; }
};

} // namespace orca
