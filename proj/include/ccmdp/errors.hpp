#pragma once

#include <stdexcept>
#include <string>

namespace ccmdp {

/// p has mass where q has none: a deterministic row leaked past softening,
/// or a prior/abstract policy lost full support.
class SupportError : public std::runtime_error {
 public:
  explicit SupportError(const std::string& what) : std::runtime_error(what) {}
};

/// An iterative solver hit its cap before reaching tolerance.
class ConvergenceError : public std::runtime_error {
 public:
  explicit ConvergenceError(const std::string& what) : std::runtime_error(what) {}
};

/// The request is well-formed but outside a method's declared limits
/// (e.g. exhaustive enumeration too large, factored exhaustive).
class CapabilityError : public std::runtime_error {
 public:
  explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace ccmdp
