#pragma once

#include <stdexcept>
#include <string>

namespace geotree {

/// Malformed arguments or preconditions that the caller can fix.
class InvalidInput : public std::invalid_argument {
public:
  explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// A construction needed a point outside the sampled window. The caller
/// has to enlarge the window; results are never silently truncated.
class BoundaryExhausted : public std::runtime_error {
public:
  explicit BoundaryExhausted(const std::string& what) : std::runtime_error(what) {}
};

/// A structural invariant failed on a built object.
class InvariantViolation : public std::logic_error {
public:
  explicit InvariantViolation(const std::string& what) : std::logic_error(what) {}
};

} // namespace geotree
