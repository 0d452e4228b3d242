#pragma once

#include <stdexcept>
#include <string>

namespace tvsched {

enum class ErrorCode {
    invalid_argument,
    io,
    parse,
    domain,
    infeasible,
    no_convergence,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
    throw Error(code, message);
}

} // namespace tvsched
