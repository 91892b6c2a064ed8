#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace newsrank {

// User-facing failures (bad input, bad config, missing files). The CLI maps
// these to exit code 1; anything else escaping a command is exit code 2.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

class ParseError : public Error {
public:
    ParseError(const std::string& source, std::size_t line, const std::string& what)
        : Error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

// Violated operation precondition (k = 0, empty matrix, zero weights, ...).
class InvalidArgument : public Error {
public:
    using Error::Error;
};

} // namespace newsrank
