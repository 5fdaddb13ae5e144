#pragma once

#include <stdexcept>
#include <string>

namespace qlm {

enum class ErrorCode {
    InvalidArgument,
    Config,
    ModeMismatch,
    ParameterOutOfRange,
    InfeasibleSchedule,
    InconsistentProfile,
    LengthMismatch,
    Io,
    Runtime,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void throw_error(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

}  // namespace qlm
