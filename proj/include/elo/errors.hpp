#pragma once

#include <stdexcept>
#include <string>

namespace elo {

/// Input outside the mathematical domain of an operation (non-finite values,
/// probabilities outside [0, 1], ...).
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Invalid or inconsistent run configuration.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Operation called on data of the wrong shape (e.g. a 3-D grid where a 2-D
/// one is required).
class UsageError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Line-up enumeration exceeds the configured cap.
class EnumerationTooLarge : public std::length_error {
 public:
  explicit EnumerationTooLarge(double count, double cap)
      : std::length_error("enumeration too large: " + std::to_string(count) +
                          " line-up pairs exceed the cap of " + std::to_string(cap) +
                          "; use the Taylor approximation or Monte Carlo estimation"),
        count_(count),
        cap_(cap) {}

  double count() const noexcept { return count_; }
  double cap() const noexcept { return cap_; }

 private:
  double count_;
  double cap_;
};

/// Explicit step rejected because it violates the CFL condition.
class CflError : public std::runtime_error {
 public:
  CflError(double max_speed, double admissible_dt)
      : std::runtime_error("CFL violation: max|a| = " + std::to_string(max_speed) +
                           ", admissible dt = " + std::to_string(admissible_dt)),
        max_speed_(max_speed),
        admissible_dt_(admissible_dt) {}

  double max_speed() const noexcept { return max_speed_; }
  double admissible_dt() const noexcept { return admissible_dt_; }

 private:
  double max_speed_;
  double admissible_dt_;
};

/// NaN or infinity appeared in a numerical state.
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace elo
