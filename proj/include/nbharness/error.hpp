#pragma once

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace nbharness {

enum class ErrorCode {
    MalformedJson,
    UnsupportedVersion,
    MissingCells,
    RootNotFound,
    IndexOutOfRange,
    ExecutorUnavailable,
    ExecutorCrash,
    InvalidArgs,
    MissingLogprob,
    LengthMismatch,
    ParseError,
    DuplicateProblem,
    EndpointUnreachable,
    BadResponse,
    ShortResponse,
    Io,
};

std::string_view error_code_name(ErrorCode code) noexcept;

// Every domain failure surfaces as this type; the CLI maps it to exit code 1.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message, std::optional<std::size_t> line = std::nullopt)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + message), code_(code), line_(line) {}

    ErrorCode code() const noexcept { return code_; }
    // 1-based input line for JSONL parse failures.
    std::optional<std::size_t> line() const noexcept { return line_; }

private:
    ErrorCode code_;
    std::optional<std::size_t> line_;
};

inline std::string_view error_code_name(ErrorCode code) noexcept {
    switch (code) {
    case ErrorCode::MalformedJson: return "MalformedJson";
    case ErrorCode::UnsupportedVersion: return "UnsupportedVersion";
    case ErrorCode::MissingCells: return "MissingCells";
    case ErrorCode::RootNotFound: return "RootNotFound";
    case ErrorCode::IndexOutOfRange: return "IndexOutOfRange";
    case ErrorCode::ExecutorUnavailable: return "ExecutorUnavailable";
    case ErrorCode::ExecutorCrash: return "ExecutorCrash";
    case ErrorCode::InvalidArgs: return "InvalidArgs";
    case ErrorCode::MissingLogprob: return "MissingLogprob";
    case ErrorCode::LengthMismatch: return "LengthMismatch";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::DuplicateProblem: return "DuplicateProblem";
    case ErrorCode::EndpointUnreachable: return "EndpointUnreachable";
    case ErrorCode::BadResponse: return "BadResponse";
    case ErrorCode::ShortResponse: return "ShortResponse";
    case ErrorCode::Io: return "Io";
    }
    return "Unknown";
}

}  // namespace nbharness
