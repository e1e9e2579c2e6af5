#pragma once

#include <stdexcept>
#include <string>

namespace cryo {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Two viewing directions are (numerically) antipodal; the geodesic between
/// them is not unique.
class AntipodalPoints : public Error {
 public:
  using Error::Error;
};

/// An argument lies outside the domain of the operation.
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Exact polynomial requested above the configured order cap.
class OrderExceeded : public Error {
 public:
  using Error::Error;
};

/// The eigensolver did not converge.
class ConvergenceFailure : public Error {
 public:
  using Error::Error;
};

/// Eigenvalues 3 and 4 of a transport matrix are not separated.
class NoSpectralGap : public Error {
 public:
  using Error::Error;
};

/// Two images live on different pixel grids.
class ShapeMismatch : public Error {
 public:
  using Error::Error;
};

/// Malformed or unreadable file.
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Experiment configuration rejected; `key()` names the offending entry.
class InvalidConfig : public Error {
 public:
  InvalidConfig(std::string key, const std::string& what)
      : Error("invalid config key '" + key + "': " + what), key_(std::move(key)) {}

  const std::string& key() const noexcept { return key_; }

 private:
  std::string key_;
};

}  // namespace cryo
