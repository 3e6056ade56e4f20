// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fbsde {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Expression text could not be parsed. `column()` is 1-based.
class ParseError : public Error {
public:
    ParseError(std::size_t column, const std::string& message)
        : Error("parse error at column " + std::to_string(column) + ": " + message),
          column_(column), message_(message) {}

    std::size_t column() const noexcept { return column_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::size_t column_;
    std::string message_;
};

/// Expression evaluation left the real domain (log of non-positive, x/0, ...).
class EvalError : public Error {
public:
    EvalError(std::string node, const std::string& message)
        : Error("evaluation error in '" + node + "': " + message), node_(std::move(node)), message_(message) {}

    const std::string& node() const noexcept { return node_; }
    const std::string& message() const noexcept { return message_; }

private:
    std::string node_;
    std::string message_;
};

/// Configuration schema violation; `pointer()` is a JSON pointer to the offending field.
class ConfigError : public Error {
public:
    ConfigError(std::string pointer, const std::string& message)
        : Error("config error at " + (pointer.empty() ? std::string("/") : pointer) + ": " + message),
          pointer_(std::move(pointer)) {}

    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

/// A numerical procedure failed (Newton divergence, sigma floor, non-finite state).
class NumericalError : public Error {
public:
    using Error::Error;
};

/// A precondition on arguments was violated.
class ArgumentError : public Error {
public:
    using Error::Error;
};

/// Refusal to produce a result because the supporting assumptions do not hold.
class RefusedError : public Error {
public:
    using Error::Error;
};

}  // namespace fbsde
