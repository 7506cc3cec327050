#pragma once

#include <stdexcept>
#include <string>

namespace hdgrag {

enum class ErrorCode {
    kInvalidArgument = 1,
    kParse,
    kConflict,
    kNotFound,
    kDimensionMismatch,
    kFormat,
    kUntrainable,
    kIo,
};

class Error : public std::runtime_error {
  public:
    Error(ErrorCode code, const std::string& what)
            : std::runtime_error(what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

  private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& msg) {
    throw Error(code, msg);
}

#define HDGRAG_REQUIRE(cond, code, msg)       \
    do {                                      \
        if (!(cond)) {                        \
            ::hdgrag::fail((code), (msg));    \
        }                                     \
    } while (0)

} // namespace hdgrag
