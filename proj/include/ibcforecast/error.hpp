#pragma once

#include <stdexcept>
#include <string>

namespace ibc {

enum class ErrorCode {
    InvalidArgument,
    MalformedInput,
    MissingMonth,
    NegativeValue,
    DuplicateEntry,
    LengthMismatch,
    DegenerateData,
    NumericalFailure,
    NotFound,
    SchemaMismatch,
    ConfigError,
};

const char* error_code_name(ErrorCode code);

// Every failure surfaced by the library is an ibc::Error; the code drives
// CLI exit status and HTTP status mapping.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

}  // namespace ibc
