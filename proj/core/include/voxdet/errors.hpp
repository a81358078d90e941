#pragma once

#include <stdexcept>
#include <string>

namespace voxdet {

/// Base class for all voxdet errors.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem-level failures: missing paths, unreadable files, short writes.
class IoError : public Error {
 public:
  using Error::Error;
};

/// Structurally or semantically invalid data or arguments: bad headers,
/// size mismatches, out-of-range values, inconsistent shapes.
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// A configuration that cannot be satisfied, e.g. more objects than fit
/// into the requested volume at the requested separation.
class InfeasibleConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace voxdet
