#pragma once

#include <stdexcept>
#include <string>

namespace fracop {

/// Principal powers s^alpha are undefined on (-inf, 0]; callers hitting the
/// cut get this instead of a silently perturbed value.
struct BranchCutError : std::domain_error {
    using std::domain_error::domain_error;
};

struct GridMismatchError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Linear solve failed (divergence, singular boundary closure, residual
/// above tolerance).
struct SolveError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Configuration rejected; `path` is the offending field, dot-separated.
struct ConfigError : std::runtime_error {
    std::string path;
    ConfigError(std::string field_path, const std::string& what)
        : std::runtime_error(field_path + ": " + what), path(std::move(field_path)) {}
};

}  // namespace fracop
