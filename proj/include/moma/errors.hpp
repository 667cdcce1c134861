#pragma once

#include <stdexcept>
#include <string>

namespace moma {

/// Base class for all errors raised by the library.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Arguments outside the domain of an operation (bad coordinates, bad spacing, shape mismatch).
class DomainError : public Error {
  public:
    using Error::Error;
};

/// A linear solve or iteration failed to meet its tolerance.
class NumericalError : public Error {
  public:
    NumericalError(const std::string& what, double residual)
        : Error(what + " (residual " + std::to_string(residual) + ")"), residual_(residual) {}

    double residual() const noexcept { return residual_; }

  private:
    double residual_;
};

/// A computation would exceed a configured memory budget.
class ResourceError : public Error {
  public:
    using Error::Error;
};

/// Invalid run configuration.
class ConfigError : public Error {
  public:
    using Error::Error;
};

} // namespace moma
