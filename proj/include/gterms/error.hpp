#pragma once

#include <stdexcept>
#include <string>

namespace gterms {

// Process exit codes shared by the CLI and the server launcher.
enum class ExitCode : int {
    ok = 0,
    data_error = 1,
    usage_error = 2,
    io_error = 3,
};

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what, ExitCode code = ExitCode::data_error)
        : std::runtime_error(what), code_(code) {}

    ExitCode exit_code() const noexcept { return code_; }

private:
    ExitCode code_;
};

// Bad or missing configuration (missing column, threshold out of range).
class ConfigError : public Error {
public:
    explicit ConfigError(const std::string& what) : Error(what, ExitCode::usage_error) {}
};

class IoError : public Error {
public:
    explicit IoError(const std::string& what) : Error(what, ExitCode::io_error) {}
};

// Inconsistent input data: duplicate-record conflicts, unknown field codes.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(what, ExitCode::data_error) {}
};

// Argument outside a function's mathematical domain.
class DomainError : public Error {
public:
    explicit DomainError(const std::string& what) : Error(what, ExitCode::data_error) {}
};

// Invalid user-supplied value (empty theme name, gender mismatch).
class ValidationError : public Error {
public:
    explicit ValidationError(const std::string& what) : Error(what, ExitCode::data_error) {}
};

class NotFoundError : public Error {
public:
    explicit NotFoundError(const std::string& what) : Error(what, ExitCode::data_error) {}
};

// Optimistic-concurrency failure: the caller's base revision is stale.
class ConflictError : public Error {
public:
    ConflictError(const std::string& what, long long current_revision)
        : Error(what, ExitCode::data_error), current_revision_(current_revision) {}

    long long current_revision() const noexcept { return current_revision_; }

private:
    long long current_revision_;
};

}  // namespace gterms
