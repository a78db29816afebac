#pragma once

#include <string>
#include <string_view>

#include "drovar/extended_real.hpp"

namespace drovar {

enum class DivergenceKind { KL, Alpha };

/// An f-divergence generator f together with its Legendre conjugate f*.
///
/// Supported generators:
///   KL:     f(t) = t log t,                      f*(y) = exp(y - 1)
///   alpha:  f(t) = (t^a - 1) / (a (a - 1)),      a in (0,1) or (1,8]
///
/// All generators live on [domain_lo, domain_hi] = [0, +inf]. For a in (0,1)
/// the divergence itself is bounded by 1 / (a (1 - a)), which caps the
/// admissible ambiguity radius.
class FDivergenceFamily {
public:
  static FDivergenceFamily kl();
  /// Throws ValidationError unless alpha is in (0,1) or (1,8].
  static FDivergenceFamily alpha(double alpha);

  /// Parses `kl` or `alpha:<value>`, case-insensitively.
  static FDivergenceFamily parse(std::string_view spec);

  DivergenceKind kind() const { return kind_; }
  /// Only meaningful for DivergenceKind::Alpha.
  double alpha_value() const { return alpha_; }
  bool is_kl() const { return kind_ == DivergenceKind::KL; }
  /// True for alpha in (0,1): f* is +inf on [0, inf).
  bool has_bounded_divergence() const { return kind_ == DivergenceKind::Alpha && alpha_ < 1.0; }

  ExtendedReal domain_lo() const { return 0.0; }
  ExtendedReal domain_hi() const { return ExtendedReal::pos_inf(); }
  ExtendedReal divergence_cap() const;

  /// Canonical spec string, e.g. "kl" or "alpha:0.5".
  std::string to_string() const;

  friend bool operator==(const FDivergenceFamily&, const FDivergenceFamily&) = default;

private:
  FDivergenceFamily(DivergenceKind kind, double alpha) : kind_(kind), alpha_(alpha) {}

  DivergenceKind kind_;
  double alpha_;
};

/// f(t), with the lower-semicontinuous extension at the endpoints of the
/// domain and +inf outside it.
ExtendedReal f_eval(const FDivergenceFamily& family, double t);

/// f*(y) = sup_t { y t - f(t) }.
ExtendedReal conj_eval(const FDivergenceFamily& family, double y);

/// (f*)'(y). Right derivative at kinks, +inf outside dom f*.
ExtendedReal conj_deriv(const FDivergenceFamily& family, double y);

/// True when y lies in the interior of dom f*, where f* is finite and C1.
bool in_conj_interior(const FDivergenceFamily& family, double y);

}  // namespace drovar
