#pragma once

#include <stdexcept>
#include <string>

namespace dspm {

// Error categories map one-to-one onto CLI exit codes.
enum class ErrorKind {
    MissingFile = 2,      // absent or unreadable input file
    FormatViolation = 3,  // file exists but its contents are malformed
    BadParameter = 4,     // parameter outside its documented range
};

class Error : public std::runtime_error {
public:
    Error(ErrorKind kind, const std::string& message)
        : std::runtime_error(message), kind_(kind) {}

    ErrorKind kind() const { return kind_; }
    int exit_code() const { return static_cast<int>(kind_); }

private:
    ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
    throw Error(kind, message);
}

}  // namespace dspm
