#pragma once

#include <stdexcept>
#include <string>

namespace pmnri {

/// Error categories; the numeric values are the CLI exit codes.
enum class ErrorKind : int {
    usage = 1,
    data = 2,
    singular = 3,
};

inline const char* to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::usage: return "usage";
        case ErrorKind::data: return "data";
        case ErrorKind::singular: return "singular";
    }
    return "unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }
    int exit_code() const noexcept { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

/// Bad command line or configuration.
class UsageError : public Error {
public:
    explicit UsageError(const std::string& what) : Error(ErrorKind::usage, what) {}
};

/// Input outside an operation's domain, or malformed data.
class DataError : public Error {
public:
    explicit DataError(const std::string& what) : Error(ErrorKind::data, what) {}
};

/// Parse failure carrying the 1-based line number of the offending input.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& what, const std::string& source = {})
        : DataError((source.empty() ? "" : source + ": ") + "line " + std::to_string(line) + ": " + what),
          line_(line),
          detail_(what) {}
    std::size_t line() const noexcept { return line_; }
    const std::string& detail() const noexcept { return detail_; }

private:
    std::size_t line_;
    std::string detail_;
};

/// A formula hit a vanishing denominator or a pole.
class SingularityError : public Error {
public:
    explicit SingularityError(const std::string& what) : Error(ErrorKind::singular, what) {}
};

}  // namespace pmnri
