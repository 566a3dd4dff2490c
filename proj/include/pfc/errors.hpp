/*
 * SPDX-License-Identifier: Apache-2.0
 */

#pragma once

#include <stdexcept>
#include <string>

namespace pfc {

/// Input outside the domain of a formula (zero impedance, phase margin too large, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Operating point where a required gain vanishes.
class DegenerateError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Phase-shift solve did not converge; carries the last residual (watts, inf-norm).
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, double residual)
        : std::runtime_error(what), residual_(residual) {}
    double residual() const noexcept { return residual_; }

private:
    double residual_;
};

/// Scenario or device file problem. `path` is the JSON-pointer-like location.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& msg)
        : std::runtime_error(path.empty() ? msg : path + ": " + msg), path_(path) {}
    const std::string& path() const noexcept { return path_; }

private:
    std::string path_;
};

} // namespace pfc
