#pragma once

#include <stdexcept>
#include <string>

namespace cshape {

enum class ErrorKind {
    invalid_argument,  // bad parameters, dimension mismatches
    parse,             // malformed mesh files, expressions, configs
    numeric,           // solver breakdown, degenerate geometry
    io,                // file system failures
    unsupported        // valid request outside implemented scope
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    ErrorKind kind() const noexcept { return kind_; }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
    throw Error(kind, msg);
}

}  // namespace cshape
