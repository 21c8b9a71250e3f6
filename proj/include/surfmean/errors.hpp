#pragma once

#include <stdexcept>
#include <string>

namespace surfmean {

enum class ErrorCode {
    invalid_grid,
    all_degenerate,
    kind_mismatch,
    shape_mismatch,
    origin_mismatch,
    degenerate_jacobian,
    degenerate_area,
    degenerate_spec,
    rejection_exhausted,
    parse_error,
    io_error,
};

inline const char* to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::invalid_grid: return "InvalidGrid";
    case ErrorCode::all_degenerate: return "AllDegenerate";
    case ErrorCode::kind_mismatch: return "KindMismatch";
    case ErrorCode::shape_mismatch: return "ShapeMismatch";
    case ErrorCode::origin_mismatch: return "OriginMismatch";
    case ErrorCode::degenerate_jacobian: return "DegenerateJacobian";
    case ErrorCode::degenerate_area: return "DegenerateArea";
    case ErrorCode::degenerate_spec: return "DegenerateSpec";
    case ErrorCode::rejection_exhausted: return "RejectionExhausted";
    case ErrorCode::parse_error: return "ParseError";
    case ErrorCode::io_error: return "IOError";
    }
    return "Unknown";
}

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code)
    {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Malformed input text; `line()` is 1-based, 0 when the problem is not tied to a line.
class ParseError : public Error {
public:
    ParseError(int line, const std::string& reason)
        : Error(ErrorCode::parse_error, "line " + std::to_string(line) + ": " + reason),
          line_(line), reason_(reason)
    {}

    int line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    int line_;
    std::string reason_;
};

} // namespace surfmean
