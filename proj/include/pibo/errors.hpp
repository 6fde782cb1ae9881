#pragma once

#include <stdexcept>
#include <string>

namespace pibo {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An index fell outside its axis.
class BoundsError : public Error {
 public:
  using Error::Error;
};

/// More distinct points were requested than the grid holds.
class CapacityError : public Error {
 public:
  using Error::Error;
};

/// A caller broke an operation's precondition (duplicate points, budget too large, ...).
class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Cholesky factorization failed even at the largest allowed jitter.
class IllConditionedError : public Error {
 public:
  IllConditionedError(const std::string& what, double last_jitter)
      : Error(what + " (last jitter tried: " + std::to_string(last_jitter) + ")"),
        last_jitter_(last_jitter) {}

  double last_jitter() const noexcept { return last_jitter_; }

 private:
  double last_jitter_;
};

/// The stack-up geometry has no physical stripline (trace pokes through a plane, ...).
class InvalidGeometryError : public Error {
 public:
  using Error::Error;
};

/// Two observations of the same grid point disagree.
class DataIntegrityError : public Error {
 public:
  using Error::Error;
};

/// A configuration file failed validation; `path()` is the offending JSON path.
class ConfigError : public Error {
 public:
  ConfigError(std::string path, const std::string& message)
      : Error(path.empty() ? message : path + ": " + message), path_(std::move(path)) {}

  const std::string& path() const noexcept { return path_; }

 private:
  std::string path_;
};

}  // namespace pibo
