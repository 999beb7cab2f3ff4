#pragma once

#include <stdexcept>
#include <string>

namespace tcpde {

/// Invalid or inconsistent configuration (bad parameter values, missing
/// config keys, malformed experiment files).
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

/// File-level failure: unreadable path, unsupported image format,
/// write failure.
class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An explicit time step produced NaN/Inf or runaway magnitudes.
/// Carries the iteration at which the scheme went unstable.
class BlowupError : public std::runtime_error {
public:
    BlowupError(const std::string& msg, int iteration)
        : std::runtime_error(msg + " (iteration " + std::to_string(iteration) + ")"),
          iteration_(iteration) {}

    int iteration() const noexcept { return iteration_; }

private:
    int iteration_;
};

/// Process exit codes used by the command-line driver.
namespace exit_code {
inline constexpr int ok = 0;
inline constexpr int config_error = 2;
inline constexpr int io_error = 3;
inline constexpr int blowup = 4;
}  // namespace exit_code

}  // namespace tcpde
