#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace gazepath {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed input text (JSONL, config, prompt files).
class ParseError : public Error {
public:
    using Error::Error;
};

/// Well-formed input that violates a domain invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Caller passed an argument outside the operation's contract.
class ParameterError : public Error {
public:
    using Error::Error;
};

/// Java source that cannot be lexed (unterminated literal or comment).
class LexError : public Error {
public:
    LexError(const std::string& what, std::size_t line)
        : Error("line " + std::to_string(line + 1) + ": " + what), line_(line) {}

    /// 0-based line of the offending construct.
    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Non-fatal diagnostic. `code` is a stable kebab-case identifier.
struct Warning {
    std::string code;
    std::string message;

    bool operator==(const Warning&) const = default;
};

using Warnings = std::vector<Warning>;

}  // namespace gazepath
