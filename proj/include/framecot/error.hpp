#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace framecot {

enum class ErrorCode {
    // tag grammar
    MalformedTag,
    MissingThink,
    DanglingFrames,
    // frame store
    EmptyVideo,
    EmptyList,
    BadManifest,
    UnknownVideo,
    UnknownFrame,
    // backends
    BackendUnavailable,
    Timeout,
    ProtocolError,
    NoMatch,
    GenerationFailed,
    // engine / pipeline / harness
    ToolInRound2,
    LengthMismatch,
    AmbiguousMatch,
    InvalidArgument,
    ConfigError,
    IoError,
};

std::string_view to_string(ErrorCode code) noexcept;

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& message)
        : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

    // True for errors raised by the tag grammar (as opposed to backends or I/O).
    bool is_format_error() const noexcept {
        return code_ == ErrorCode::MalformedTag || code_ == ErrorCode::MissingThink ||
               code_ == ErrorCode::DanglingFrames;
    }

    bool is_backend_error() const noexcept {
        return code_ == ErrorCode::BackendUnavailable || code_ == ErrorCode::Timeout ||
               code_ == ErrorCode::ProtocolError || code_ == ErrorCode::NoMatch ||
               code_ == ErrorCode::GenerationFailed;
    }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

}  // namespace framecot
