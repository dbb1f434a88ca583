#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace hq {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Fields living on different grids, or buffers of the wrong length.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// Bad scalar arguments (orders of symmetric functions, step sizes, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// Errors tied to a grid node.
class NodeError : public Error {
 public:
  NodeError(const std::string& what, std::size_t node)
      : Error(what + " (node " + std::to_string(node) + ")"), node_(node) {}

  std::size_t node() const noexcept { return node_; }

 private:
  std::size_t node_;
};

/// A tensor that should be a metric is not positive definite.
class GeometryError : public NodeError {
 public:
  using NodeError::NodeError;
};

/// chi + Hess(u) is not positive definite, or an eigenvalue is nonpositive.
class AdmissibilityError : public NodeError {
 public:
  using NodeError::NodeError;
};

/// The requested analysis is not defined for this configuration.
class UnsupportedConfiguration : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration; key() names the offending entry.
class ConfigError : public Error {
 public:
  ConfigError(const std::string& key, const std::string& what)
      : Error(key + ": " + what), key_(key) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace hq
