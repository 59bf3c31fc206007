#pragma once

#include <stdexcept>
#include <string>

namespace iiss {

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A sequence query reached past the materialized horizon.
class HorizonError : public Error {
 public:
  using Error::Error;
};

/// Inversion target outside the achievable range of a rate function.
class RangeError : public Error {
 public:
  RangeError(const std::string& what, double lo, double hi) : Error(what), lo_(lo), hi_(hi) {}
  [[nodiscard]] double achievable_lo() const noexcept { return lo_; }
  [[nodiscard]] double achievable_hi() const noexcept { return hi_; }

 private:
  double lo_;
  double hi_;
};

/// Evaluation left the declared domain of a function.
class DomainError : public Error {
 public:
  using Error::Error;
};

class QuadratureError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

/// Finite escape time of a growth-regime comparison solution.
class EscapeError : public Error {
 public:
  EscapeError(const std::string& what, double t_lo, double t_hi)
      : Error(what), t_lo_(t_lo), t_hi_(t_hi) {}
  [[nodiscard]] double bracket_lo() const noexcept { return t_lo_; }
  [[nodiscard]] double bracket_hi() const noexcept { return t_hi_; }

 private:
  double t_lo_;
  double t_hi_;
};

class IntegrationError : public Error {
 public:
  IntegrationError(const std::string& what, double t) : Error(what), t_(t) {}
  [[nodiscard]] double time() const noexcept { return t_; }

 private:
  double t_;
};

/// A computation could not reach a conclusion (e.g. unresolved tail behaviour).
class InconclusiveError : public Error {
 public:
  using Error::Error;
};

class ValidationError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace iiss
