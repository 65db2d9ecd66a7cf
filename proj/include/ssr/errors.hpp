#pragma once

#include <stdexcept>
#include <string>

namespace ssr {

class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
    virtual const char* kind() const noexcept { return "error"; }
};

class ShapeError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "shape_error"; }
};

class ConfigError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "config_error"; }
};

class NumericalError : public Error {
public:
    using Error::Error;
    const char* kind() const noexcept override { return "numerical_error"; }
};

// Raised when an iterative solver produces non-finite values.
class DivergenceError : public NumericalError {
public:
    using NumericalError::NumericalError;
    const char* kind() const noexcept override { return "divergence_error"; }
};

class ParseError : public Error {
public:
    ParseError(const std::string& what, std::string file = {}, long line = 0)
        : Error(what), file_(std::move(file)), line_(line) {}
    const char* kind() const noexcept override { return "parse_error"; }
    const std::string& file() const noexcept { return file_; }
    long line() const noexcept { return line_; }

private:
    std::string file_;
    long line_;
};

}  // namespace ssr
