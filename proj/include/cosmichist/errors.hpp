#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace cosmichist {

//! Base class for every failure of a numerical procedure.
class NumericalError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

//! Quadrature failure. Carries the offending abscissa (non-finite
//! integrand) or the best available estimate (depth exhaustion).
class IntegrationError : public NumericalError {
public:
  enum class Kind { non_finite, depth_exhausted };

  IntegrationError(Kind kind, double where, double best_estimate, const std::string& what);

  Kind kind() const noexcept { return kind_; }
  double abscissa() const noexcept { return abscissa_; }
  double best_estimate() const noexcept { return best_estimate_; }

private:
  Kind kind_;
  double abscissa_;
  double best_estimate_;
};

//! ODE failure with the value of the independent variable where it happened.
class OdeError : public NumericalError {
public:
  enum class Kind { step_underflow, non_finite, too_many_steps };

  OdeError(Kind kind, double where, const std::string& what);

  Kind kind() const noexcept { return kind_; }
  double location() const noexcept { return location_; }

private:
  Kind kind_;
  double location_;
};

//! Query outside the tabulated domain.
class RangeError : public std::out_of_range {
public:
  RangeError(double value, double lo, double hi, const std::string& what);

  double value() const noexcept { return value_; }
  double lower() const noexcept { return lower_; }
  double upper() const noexcept { return upper_; }

private:
  double value_;
  double lower_;
  double upper_;
};

//! Argument outside the mathematical domain of an operation (negative
//! redshift, non-positive wavenumber, ...).
class DomainError : public std::domain_error {
public:
  using std::domain_error::domain_error;
};

//! Invalid parameter record. keys() names every field involved.
class ParameterError : public std::invalid_argument {
public:
  ParameterError(std::vector<std::string> keys, const std::string& what)
      : std::invalid_argument(what), keys_(std::move(keys)) {}

  const std::vector<std::string>& keys() const noexcept { return keys_; }

private:
  std::vector<std::string> keys_;
};

} // namespace cosmichist
