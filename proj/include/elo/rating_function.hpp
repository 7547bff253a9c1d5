#pragma once

#include <functional>
#include <memory>
#include <string>
#include <string_view>

namespace elo {

/// Odd, bounded, increasing response function b mapping a strength or rating
/// gap to an expected match outcome.
///
/// The standard choice is b(z) = tanh(nu z), for which all derivatives are
/// closed-form. A custom b can be supplied; its derivatives are then taken by
/// central finite differences.
class RatingFunction {
 public:
  using Fn = std::function<double(double)>;

  /// b(z) = tanh(nu z). Throws DomainError unless nu is positive and finite.
  static RatingFunction tanh(double nu);

  /// Arbitrary b. `nu` is only reported back (e.g. in manifests); pass the
  /// slope b'(0) if it has a meaning for the function.
  static RatingFunction custom(Fn b, double nu, std::string name);

  double operator()(double z) const { return eval(z); }
  double eval(double z) const;
  double deriv1(double z) const;
  double deriv2(double z) const;
  double deriv3(double z) const;

  double nu() const noexcept { return nu_; }
  bool is_tanh() const noexcept { return !custom_; }
  const std::string& name() const noexcept { return name_; }

 private:
  RatingFunction() = default;

  double nu_ = 1.0;
  std::shared_ptr<const Fn> custom_;
  std::string name_;
};

/// Pairing-rate function w of the rating gap. Even and nonnegative.
class InteractionKernel {
 public:
  enum class Kind { AllPlayAll, Indicator, SmoothBump };

  static InteractionKernel all_play_all() { return InteractionKernel(Kind::AllPlayAll, 0.0); }
  /// chi_{|x| <= c}; c must be positive.
  static InteractionKernel indicator(double c);
  /// exp(log 2 / (1 + x^2)) - 1.
  static InteractionKernel smooth_bump() { return InteractionKernel(Kind::SmoothBump, 0.0); }

  /// Parses "all", "indicator:<c>" or "bump".
  static InteractionKernel parse(std::string_view text);
  std::string to_string() const;

  double operator()(double x) const;
  double max_value() const noexcept { return 1.0; }
  /// Smallest value of w over rating gaps |x| <= max_gap.
  double min_over(double max_gap) const;

  Kind kind() const noexcept { return kind_; }
  double cutoff() const noexcept { return cutoff_; }

 private:
  InteractionKernel(Kind kind, double cutoff) : kind_(kind), cutoff_(cutoff) {}

  Kind kind_;
  double cutoff_;
};

}  // namespace elo
