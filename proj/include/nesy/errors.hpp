#pragma once

#include <stdexcept>
#include <string>

namespace nesy {

/// Broad failure classes. The CLI maps these onto process exit codes.
enum class ErrorKind {
    argument,
    configuration,
    engine_unavailable,
    protocol,
    constraint_violation,
    lookup,
    graph,
    budget,
    format,
    state,
    parse,
    capability_missing,
    unsupported,
    execution,
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

#define NESY_DEFINE_ERROR(Name, Kind)                                          \
    class Name : public Error {                                                \
    public:                                                                    \
        explicit Name(const std::string& what) : Error(ErrorKind::Kind, what) {} \
    };

NESY_DEFINE_ERROR(ArgumentError, argument)
NESY_DEFINE_ERROR(ConfigError, configuration)
NESY_DEFINE_ERROR(EngineUnavailableError, engine_unavailable)
NESY_DEFINE_ERROR(ConstraintViolation, constraint_violation)
NESY_DEFINE_ERROR(LookupError, lookup)
NESY_DEFINE_ERROR(GraphError, graph)
NESY_DEFINE_ERROR(FormatError, format)
NESY_DEFINE_ERROR(StateError, state)
NESY_DEFINE_ERROR(CapabilityMissingError, capability_missing)
NESY_DEFINE_ERROR(UnsupportedCombination, unsupported)

#undef NESY_DEFINE_ERROR

/// Malformed engine response; keeps the raw body for diagnosis.
class ProtocolError : public Error {
public:
    ProtocolError(const std::string& what, std::string raw_body)
        : Error(ErrorKind::protocol, what), raw_body_(std::move(raw_body)) {}
    const std::string& raw_body() const noexcept { return raw_body_; }

private:
    std::string raw_body_;
};

/// Request exceeds the engine's context budget. No truncation is attempted.
class BudgetError : public Error {
public:
    BudgetError(std::size_t measured, std::size_t budget)
        : Error(ErrorKind::budget, "request needs " + std::to_string(measured) +
                                       " tokens, context budget is " + std::to_string(budget)),
          measured_(measured), budget_(budget) {}
    std::size_t measured() const noexcept { return measured_; }
    std::size_t budget() const noexcept { return budget_; }

private:
    std::size_t measured_;
    std::size_t budget_;
};

class ParseError : public Error {
public:
    ParseError(std::size_t line, const std::string& what)
        : Error(ErrorKind::parse, "line " + std::to_string(line) + ": " + what), line_(line) {}
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Failure raised by an executed behavior. `output` holds whatever the
/// behavior produced before failing (may be empty).
class ExecutionError : public Error {
public:
    ExecutionError(const std::string& what, std::string output = {})
        : Error(ErrorKind::execution, what), output_(std::move(output)) {}
    const std::string& output() const noexcept { return output_; }

private:
    std::string output_;
};

/// Exit code contract of the command line front end.
inline int exit_code_for(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::configuration:
        case ErrorKind::argument:
        case ErrorKind::parse:
        case ErrorKind::format:
            return 2;
        case ErrorKind::engine_unavailable:
        case ErrorKind::protocol:
        case ErrorKind::budget:
            return 3;
        case ErrorKind::constraint_violation:
            return 4;
        default:
            return 1;
    }
}

}  // namespace nesy
