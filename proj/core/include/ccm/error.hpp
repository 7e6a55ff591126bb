#pragma once

#include <stdexcept>
#include <string>

namespace ccm {

// Base of every exception thrown by the library. The CLI maps the two
// families below onto its exit codes (validation -> 2, I/O -> 1).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Input is readable but violates a documented contract.
class ValidationError : public Error {
public:
    using Error::Error;
};

// A file or stream could not be opened, read or written.
class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public ValidationError {
public:
    using ValidationError::ValidationError;
};

// Raised while loading structured data; carries the 1-based line number.
class LoadError : public ValidationError {
public:
    LoadError(std::size_t line, const std::string& what)
        : ValidationError("line " + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

}  // namespace ccm
