#pragma once

#include <stdexcept>
#include <string>

namespace magwell {

struct ParseError : std::runtime_error {
    int line;
    int column;
    ParseError(const std::string& msg, int line_, int column_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                             std::to_string(column_) + ")"),
          line(line_), column(column_) {}
};

// Raised when one of the well hypotheses fails; `assumption` is 1..4.
struct AssumptionError : std::runtime_error {
    int assumption;
    AssumptionError(int which, const std::string& msg)
        : std::runtime_error("assumption " + std::to_string(which) + " violated: " + msg),
          assumption(which) {}
};

struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ResonanceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AlgebraError : std::logic_error {
    using std::logic_error::logic_error;
};

}  // namespace magwell
