#pragma once

#include <stdexcept>
#include <string>

namespace nnct {

/// Input violates a documented precondition (bad coordinates, empty class, ...).
class InvalidInput : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// The statistic is undefined for this table (zero variance, singular covariance).
class DegenerateTest : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed external data; carries the 1-based line number when known.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what),
          line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

/// Internal invariant broken (mismatched structures passed together).
class ConsistencyError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

} // namespace nnct
