#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace regulib {

/// Root of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid argument: shape mismatch, out-of-domain parameter, asymmetric input.
class ArgumentError : public Error {
 public:
  using Error::Error;
};

/// A model map returned a non-finite value.
class EvaluationError : public Error {
 public:
  using Error::Error;
};

/// Regulator or reduction synthesis rejected its design data.
class SynthesisError : public Error {
 public:
  using Error::Error;
};

/// Analysis could not be carried out on the given data.
class AnalysisError : public Error {
 public:
  using Error::Error;
};

/// Malformed or unknown configuration.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Non-finite right-hand side met during integration.
class IntegrationError : public Error {
 public:
  IntegrationError(double t, std::size_t component, const std::string& what)
      : Error(what), t_(t), component_(component) {}

  double time() const noexcept { return t_; }
  std::size_t component() const noexcept { return component_; }

 private:
  double t_;
  std::size_t component_;
};

}  // namespace regulib
