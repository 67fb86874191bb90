#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ergmfg {

/// Base class for all solver-suite errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Two objects live on incompatible grids (dim or n mismatch).
class DimensionError : public Error {
public:
    explicit DimensionError(const std::string& what) : Error(what) {}
};

/// A value violates a declared range or invariant.
class InvariantError : public Error {
public:
    explicit InvariantError(const std::string& what) : Error(what) {}
};

/// Explicit transport step refused: dt too large for the drift.
class CflError : public Error {
public:
    CflError(const std::string& what, double admissible_dt_)
        : Error(what), admissible_dt(admissible_dt_) {}
    double admissible_dt;
};

/// Semi-Lagrangian argmin landed on the velocity-box boundary; the
/// a-priori gradient bound used to size the box was too small.
class VelocityBoxError : public Error {
public:
    VelocityBoxError(const std::string& what, double v_max_)
        : Error(what), v_max(v_max_) {}
    double v_max;
};

/// Fixed-point style iteration ran out of its iteration budget.
/// Carries the residual history for diagnosis.
class NonConvergenceError : public Error {
public:
    NonConvergenceError(const std::string& what, std::vector<double> history)
        : Error(what), residual_history(std::move(history)) {}
    std::vector<double> residual_history;
};

/// Configuration file problem; `key` is the offending key path when known.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what, std::string key_ = {})
        : Error(what), key(std::move(key_)) {}
    std::string key;
};

} // namespace ergmfg
