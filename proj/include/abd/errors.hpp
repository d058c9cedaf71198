#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace abd {

// Problems in input data: malformed files, inconsistent topics, invalid
// scenario specs. Distinct from std::invalid_argument, which is reserved
// for caller-side contract violations (bad configs, bad indices).
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Malformed row in a CSV stream; carries the 1-based line number.
class ParseError : public DataError {
public:
    ParseError(std::size_t line, const std::string& message)
        : DataError("line " + std::to_string(line) + ": " + message), line_(line)
    {
    }

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

} // namespace abd
