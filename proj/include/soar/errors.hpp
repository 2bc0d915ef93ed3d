#ifndef SOAR_ERRORS_HPP
#define SOAR_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace soar {

struct EmptyRegionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InvalidBoundaryError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Malformed mesh/data file; `line` is the 1-based line where parsing failed.
struct ParseError : std::runtime_error {
    int line;
    ParseError(const std::string& what, int line_no)
        : std::runtime_error(what + " (line " + std::to_string(line_no) + ")"), line(line_no) {}
};

struct DegenerateElementError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct MissingBoundaryValueError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DimensionMismatchError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SingularSystemError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonFiniteIterateError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroReferenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace soar

#endif
