#pragma once

#include <stdexcept>
#include <string>

namespace cspb {

// Malformed or inconsistent caller input (vocabulary mismatches, bad
// identifiers, out-of-range picks, violated preconditions).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Text that does not conform to one of the on-disk grammars.
struct ParseError : std::runtime_error {
    int line = 0;
    int column = 0;

    ParseError(const std::string& msg, int line_, int column_)
        : std::runtime_error(msg + " (line " + std::to_string(line_) + ", column " +
                             std::to_string(column_) + ")"),
          line(line_),
          column(column_) {}
};

// A search or enumeration exceeded its configured budget. Callers that want
// a bigger budget pass one explicitly; nothing silently truncates.
struct ResourceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace cspb
