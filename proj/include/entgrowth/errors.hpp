#pragma once

#include <stdexcept>
#include <string>

namespace entgrowth {

// Process exit codes used by the command line front end.
enum class ExitCode : int { ok = 0, config = 2, numerical = 3, io = 4 };

class Error : public std::runtime_error {
public:
    Error(ExitCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ExitCode code() const noexcept { return code_; }

private:
    ExitCode code_;
};

// Bad parameter values, malformed configuration, invalid grids.
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(ExitCode::config, what) {}
};

// Anything that goes wrong inside a numerical routine: degenerate states,
// eigensolver failure, stiff SDE regions, fit non-convergence.
class NumericalError : public Error {
public:
    explicit NumericalError(const std::string& what) : Error(ExitCode::numerical, what) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(ExitCode::io, what) {}
};

}  // namespace entgrowth
