// Exception types shared by every ussir module.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ussir {

/// Malformed expression text. `position` is the 0-based byte offset of the
/// offending token.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string &what, std::size_t position)
        : std::runtime_error(what + " at position " + std::to_string(position)),
          position_(position) {}

    std::size_t position() const noexcept { return position_; }

private:
    std::size_t position_;
};

/// Evaluation outside a function's domain (ln of a non-positive value,
/// division by zero, a non-finite result, a jump ratio 1 + h/x <= 0).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// Invalid scenario file or model parameters. `line` is 1-based, 0 when the
/// error is not tied to a line.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string &what, std::size_t line = 0)
        : std::runtime_error(line == 0 ? what : "line " + std::to_string(line) + ": " + what),
          line_(line) {}

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace ussir
