#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace crpd {

// The divergence family is smooth in gamma except at two removable
// singularities: gamma = 0 (exponential tilting) and gamma = -1
// (empirical likelihood). Values within branch_eps of a singular point
// are routed to the closed-form limit.
enum class GammaBranch { generic, exponential_tilting, empirical_likelihood };

class Gamma {
 public:
  static constexpr double branch_eps = 1e-8;

  explicit Gamma(double value) : value_(value) {
    if (!std::isfinite(value)) {
      throw std::invalid_argument("gamma must be finite, got " + std::to_string(value));
    }
    if (std::fabs(value) <= branch_eps) {
      branch_ = GammaBranch::exponential_tilting;
    } else if (std::fabs(value + 1.0) <= branch_eps) {
      branch_ = GammaBranch::empirical_likelihood;
    } else {
      branch_ = GammaBranch::generic;
    }
  }

  double value() const noexcept { return value_; }
  GammaBranch branch() const noexcept { return branch_; }
  bool exponential_tilting() const noexcept {
    return branch_ == GammaBranch::exponential_tilting;
  }
  bool empirical_likelihood() const noexcept {
    return branch_ == GammaBranch::empirical_likelihood;
  }

 private:
  double value_;
  GammaBranch branch_;
};

inline const char* branch_name(GammaBranch b) {
  switch (b) {
    case GammaBranch::exponential_tilting:
      return "exponential_tilting";
    case GammaBranch::empirical_likelihood:
      return "empirical_likelihood";
    default:
      return "generic";
  }
}

}  // namespace crpd
