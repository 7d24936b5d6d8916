#pragma once

#include <stdexcept>
#include <string>

namespace groupdet {

enum class ErrorCode {
    InvalidArgument,
    InvalidDimensions,
    EmptyIntersection,
    FrameTooSmall,
    IndexOutOfRange,
    DimensionMismatch,
    ParseError,
    UnreadableImage,
    IoError,
    MissingExternalScore,
    VideoIdMismatch,
};

const char* to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above so the
/// CLI can map it onto an exit status without string matching.
class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Malformed input record; `line` is 1-based.
class ParseError : public Error {
public:
    ParseError(std::string source, int line, const std::string& reason)
        : Error(ErrorCode::ParseError,
                source + ":" + std::to_string(line) + ": " + reason),
          source_(std::move(source)), line_(line), reason_(reason) {}

    const std::string& source() const noexcept { return source_; }
    int line() const noexcept { return line_; }
    const std::string& reason() const noexcept { return reason_; }

private:
    std::string source_;
    int line_;
    std::string reason_;
};

}  // namespace groupdet
