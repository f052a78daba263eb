#pragma once

#include <stdexcept>
#include <string>

namespace orbitreg {

// Value cannot be represented in the declared rational span.
struct SpanError : std::runtime_error {
    explicit SpanError(const std::string& m) : std::runtime_error(m) {}
};

// Bad input: non-square, non-commuting, malformed literal, precondition violation.
struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& m) : std::runtime_error(m) {}
};

// Numeric eigenvalue clusters too close to separate; higher precision needed.
struct ClusterError : std::runtime_error {
    explicit ClusterError(const std::string& m) : std::runtime_error(m) {}
};

// Requested exact tier but the computation had to go numeric.
struct TierError : std::runtime_error {
    explicit TierError(const std::string& m) : std::runtime_error(m) {}
};

// map_orbit target lies on a singular hyperplane.
struct NotInRegularRegion : std::runtime_error {
    explicit NotInRegularRegion(const std::string& m) : std::runtime_error(m) {}
};

}  // namespace orbitreg
