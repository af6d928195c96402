#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace dream {

/// Position in a scenario source; line 0 means "constructed programmatically".
struct SourcePos {
    std::size_t line = 0;
    std::size_t column = 0;

    [[nodiscard]] bool known() const { return line != 0; }
    [[nodiscard]] std::string str() const {
        return std::to_string(line) + ":" + std::to_string(column);
    }
    friend bool operator==(const SourcePos&, const SourcePos&) = default;
};

/// A positioned problem report (parser, well-formedness checks).
struct Diagnostic {
    SourcePos pos;
    std::string message;

    [[nodiscard]] std::string str() const { return pos.known() ? pos.str() + ": " + message : message; }
};

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Expression or term evaluation failed (dangling reference, type mismatch, ...).
class EvalError : public Error {
public:
    using Error::Error;
};

/// A model is malformed (bad component type, unbound variable, unknown motif, ...).
class ModelError : public Error {
public:
    using Error::Error;
};

/// A brute-force routine was asked to enumerate beyond its configured bound.
class LimitError : public Error {
public:
    using Error::Error;
};

/// Operational-semantics precondition violated (port not enabled, no candidate, ...).
class SemanticsError : public Error {
public:
    using Error::Error;
};

}  // namespace dream
