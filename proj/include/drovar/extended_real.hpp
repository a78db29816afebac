#pragma once

#include <cassert>
#include <cmath>
#include <compare>
#include <limits>
#include <ostream>

namespace drovar {

/// A real number extended with +inf and -inf. NaN is never a valid state.
///
/// Adding +inf and -inf is a logic error and asserts. The one place where
/// inf - inf is meaningful (extending E_Q[phi] to all Q in the mean bound)
/// goes through subtract_inf_is_inf() explicitly.
class ExtendedReal {
public:
  constexpr ExtendedReal() = default;
  constexpr ExtendedReal(double v) : v_(v) { assert(!std::isnan(v)); }  // NOLINT

  static constexpr ExtendedReal pos_inf() {
    return ExtendedReal(std::numeric_limits<double>::infinity());
  }
  static constexpr ExtendedReal neg_inf() {
    return ExtendedReal(-std::numeric_limits<double>::infinity());
  }

  constexpr bool is_finite() const { return std::isfinite(v_); }
  constexpr bool is_pos_inf() const { return v_ == std::numeric_limits<double>::infinity(); }
  constexpr bool is_neg_inf() const { return v_ == -std::numeric_limits<double>::infinity(); }

  /// Underlying double, possibly +-inf.
  constexpr double value() const { return v_; }

  friend constexpr ExtendedReal operator+(ExtendedReal a, ExtendedReal b) {
    assert(!(a.is_pos_inf() && b.is_neg_inf()) && !(a.is_neg_inf() && b.is_pos_inf()));
    return ExtendedReal(a.v_ + b.v_);
  }
  friend constexpr ExtendedReal operator-(ExtendedReal a) { return ExtendedReal(-a.v_); }
  friend constexpr ExtendedReal operator-(ExtendedReal a, ExtendedReal b) { return a + (-b); }

  /// Scaling by a finite, strictly positive factor keeps infinities intact.
  friend constexpr ExtendedReal operator*(double s, ExtendedReal a) {
    assert(s > 0.0 && std::isfinite(s));
    return ExtendedReal(s * a.v_);
  }

  ExtendedReal& operator+=(ExtendedReal o) { return *this = *this + o; }

  friend constexpr bool operator==(ExtendedReal a, ExtendedReal b) = default;
  friend constexpr auto operator<=>(ExtendedReal a, ExtendedReal b) { return a.v_ <=> b.v_; }

  friend std::ostream& operator<<(std::ostream& os, ExtendedReal x) { return os << x.v_; }

private:
  double v_ = 0.0;
};

/// a - b with the convention inf - inf == inf.
constexpr ExtendedReal subtract_inf_is_inf(ExtendedReal a, ExtendedReal b) {
  if (a.is_pos_inf() || b.is_neg_inf()) return ExtendedReal::pos_inf();
  return a - b;
}

}  // namespace drovar
