#include "elo/rating_function.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "elo/errors.hpp"

namespace elo {

namespace {

// Finite-difference steps for custom b: each balances truncation against
// cancellation for the derivative order.
constexpr double kStep1 = 1e-5;
constexpr double kStep2 = 1e-4;
constexpr double kStep3 = 1e-3;

double sech2(double x) {
  const double c = std::cosh(x);
  return 1.0 / (c * c);
}

}  // namespace

RatingFunction RatingFunction::tanh(double nu) {
  if (!std::isfinite(nu) || nu <= 0.0) {
    throw DomainError("rating function: nu must be positive and finite");
  }
  RatingFunction b;
  b.nu_ = nu;
  std::ostringstream os;
  os << "tanh(" << nu << " z)";
  b.name_ = os.str();
  return b;
}

RatingFunction RatingFunction::custom(Fn fn, double nu, std::string name) {
  if (!fn) throw DomainError("rating function: empty callable");
  RatingFunction b;
  b.nu_ = nu;
  b.custom_ = std::make_shared<const Fn>(std::move(fn));
  b.name_ = std::move(name);
  return b;
}

double RatingFunction::eval(double z) const {
  if (custom_) return (*custom_)(z);
  return std::tanh(nu_ * z);
}

double RatingFunction::deriv1(double z) const {
  if (custom_) {
    const auto& f = *custom_;
    return (f(z + kStep1) - f(z - kStep1)) / (2.0 * kStep1);
  }
  return nu_ * sech2(nu_ * z);
}

double RatingFunction::deriv2(double z) const {
  if (custom_) {
    const auto& f = *custom_;
    return (f(z + kStep2) - 2.0 * f(z) + f(z - kStep2)) / (kStep2 * kStep2);
  }
  const double x = nu_ * z;
  return -2.0 * nu_ * nu_ * std::tanh(x) * sech2(x);
}

double RatingFunction::deriv3(double z) const {
  if (custom_) {
    const auto& f = *custom_;
    const double h = kStep3;
    return (f(z + 2 * h) - 2.0 * f(z + h) + 2.0 * f(z - h) - f(z - 2 * h)) / (2.0 * h * h * h);
  }
  const double x = nu_ * z;
  const double s2 = sech2(x);
  const double t = std::tanh(x);
  return -2.0 * nu_ * nu_ * nu_ * s2 * (s2 - 2.0 * t * t);
}

InteractionKernel InteractionKernel::indicator(double c) {
  if (!std::isfinite(c) || c <= 0.0) {
    throw DomainError("indicator kernel: cutoff must be positive and finite");
  }
  return InteractionKernel(Kind::Indicator, c);
}

InteractionKernel InteractionKernel::parse(std::string_view text) {
  if (text == "all") return all_play_all();
  if (text == "bump") return smooth_bump();
  constexpr std::string_view prefix = "indicator:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string value(text.substr(prefix.size()));
    std::size_t used = 0;
    double c = 0.0;
    try {
      c = std::stod(value, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != value.size()) {
      throw ConfigError("kernel: cannot parse cutoff in '" + std::string(text) + "'");
    }
    try {
      return indicator(c);
    } catch (const DomainError& e) {
      throw ConfigError(e.what());
    }
  }
  throw ConfigError("kernel: expected all|indicator:<c>|bump, got '" + std::string(text) + "'");
}

std::string InteractionKernel::to_string() const {
  switch (kind_) {
    case Kind::AllPlayAll:
      return "all";
    case Kind::SmoothBump:
      return "bump";
    case Kind::Indicator: {
      std::ostringstream os;
      os.precision(17);
      os << "indicator:" << cutoff_;
      return os.str();
    }
  }
  return "all";
}

double InteractionKernel::operator()(double x) const {
  switch (kind_) {
    case Kind::AllPlayAll:
      return 1.0;
    case Kind::Indicator:
      return std::abs(x) <= cutoff_ ? 1.0 : 0.0;
    case Kind::SmoothBump:
      return std::exp(std::numbers::ln2 / (1.0 + x * x)) - 1.0;
  }
  return 0.0;
}

double InteractionKernel::min_over(double max_gap) const {
  const double g = std::abs(max_gap);
  switch (kind_) {
    case Kind::AllPlayAll:
      return 1.0;
    case Kind::Indicator:
      return g <= cutoff_ ? 1.0 : 0.0;
    case Kind::SmoothBump:
      // decreasing in |x|
      return (*this)(g);
  }
  return 0.0;
}

}  // namespace elo
