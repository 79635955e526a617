#pragma once

#include <stdexcept>
#include <string>

namespace thg {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed or physically invalid configuration input.
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg, int line = -1, std::string field = {})
        : Error(format(msg, line, field)), line(line), field(std::move(field)) {}
    int line;           // 1-based config line, -1 if not tied to a line
    std::string field;  // offending key, empty if not tied to a field

private:
    static std::string format(const std::string& msg, int line, const std::string& field) {
        std::string s = "config error";
        if (line >= 1) s += " (line " + std::to_string(line) + ")";
        if (!field.empty()) s += " [" + field + "]";
        return s + ": " + msg;
    }
};

/// Merge attempted between accumulators built on different layouts/grids.
struct GridMismatchError : Error {
    using Error::Error;
};

/// Statistic requested from fewer samples than it is defined on.
struct InsufficientSamplesError : Error {
    using Error::Error;
};

/// Inference from a steerer mode whose variance is numerically zero.
struct DegenerateSteererError : Error {
    using Error::Error;
};

/// Drift matrix has an eigenvalue with negative real part; no stationary spectrum.
struct InstabilityError : Error {
    using Error::Error;
};

/// Iterative solve failed to reach the required residual.
struct ConvergenceError : Error {
    ConvergenceError(const std::string& msg, double best_residual)
        : Error(msg + " (best residual " + std::to_string(best_residual) + ")"),
          best_residual(best_residual) {}
    double best_residual;
};

}  // namespace thg
