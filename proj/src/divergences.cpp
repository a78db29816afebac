#include "drovar/divergences.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <sstream>

#include "drovar/errors.hpp"

namespace drovar {

namespace {

// exp(700) is close to the top of the double range.
constexpr double kMaxExponent = 700.0;

std::string lowercase(std::string_view s) {
  std::string out(s);
  std::transform(out.begin(), out.end(), out.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return out;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

}  // namespace

FDivergenceFamily FDivergenceFamily::kl() { return FDivergenceFamily(DivergenceKind::KL, 0.0); }

FDivergenceFamily FDivergenceFamily::alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 8.0) || alpha == 1.0) {
    std::ostringstream msg;
    msg << "alpha must lie in (0,1) or (1,8], got " << alpha;
    throw ValidationError(msg.str());
  }
  return FDivergenceFamily(DivergenceKind::Alpha, alpha);
}

FDivergenceFamily FDivergenceFamily::parse(std::string_view spec) {
  const std::string s = lowercase(trim(spec));
  if (s == "kl") return kl();
  constexpr std::string_view prefix = "alpha:";
  if (s.rfind(prefix, 0) == 0) {
    const std::string_view num = trim(std::string_view(s).substr(prefix.size()));
    double a = 0.0;
    const auto [ptr, ec] = std::from_chars(num.data(), num.data() + num.size(), a);
    if (ec != std::errc() || ptr != num.data() + num.size() || num.empty()) {
      throw ValidationError("cannot parse alpha value in divergence spec '" + std::string(spec) + "'");
    }
    return alpha(a);
  }
  throw ValidationError("unknown divergence spec '" + std::string(spec) +
                        "' (expected 'kl' or 'alpha:<value>')");
}

ExtendedReal FDivergenceFamily::divergence_cap() const {
  if (has_bounded_divergence()) return 1.0 / (alpha_ * (1.0 - alpha_));
  return ExtendedReal::pos_inf();
}

std::string FDivergenceFamily::to_string() const {
  if (is_kl()) return "kl";
  std::ostringstream os;
  os.precision(12);
  os << "alpha:" << alpha_;
  return os.str();
}

ExtendedReal f_eval(const FDivergenceFamily& family, double t) {
  if (t < 0.0) return ExtendedReal::pos_inf();
  if (std::isinf(t)) return ExtendedReal::pos_inf();
  if (family.is_kl()) {
    if (t == 0.0) return 0.0;
    return t * std::log(t);
  }
  const double a = family.alpha_value();
  // t^a - 1 computed as expm1 keeps f(t) accurate near t = 1.
  if (t == 0.0) return -1.0 / (a * (a - 1.0));
  return std::expm1(a * std::log(t)) / (a * (a - 1.0));
}

ExtendedReal conj_eval(const FDivergenceFamily& family, double y) {
  if (family.is_kl()) {
    if (y - 1.0 > kMaxExponent) return ExtendedReal::pos_inf();
    return std::exp(y - 1.0);
  }
  const double a = family.alpha_value();
  if (a > 1.0) {
    const double base = 1.0 / (a * (a - 1.0));
    if (y <= 0.0) return base;
    // y^{a/(a-1)} a^{-1} (a-1)^{a/(a-1)} = ((a-1) y)^{a/(a-1)} / a
    const double v = std::pow((a - 1.0) * y, a / (a - 1.0)) / a + base;
    return std::isfinite(v) ? ExtendedReal(v) : ExtendedReal::pos_inf();
  }
  if (y >= 0.0) return ExtendedReal::pos_inf();
  // |y|^{-a/(1-a)} a^{-1} (1-a)^{-a/(1-a)} - 1/(a(1-a))
  const double v = std::pow((1.0 - a) * -y, -a / (1.0 - a)) / a - 1.0 / (a * (1.0 - a));
  return std::isfinite(v) ? ExtendedReal(v) : ExtendedReal::pos_inf();
}

ExtendedReal conj_deriv(const FDivergenceFamily& family, double y) {
  if (family.is_kl()) {
    if (y - 1.0 > kMaxExponent) return ExtendedReal::pos_inf();
    return std::exp(y - 1.0);
  }
  const double a = family.alpha_value();
  if (a > 1.0) {
    if (y <= 0.0) return 0.0;
    const double v = std::pow((a - 1.0) * y, 1.0 / (a - 1.0));
    return std::isfinite(v) ? ExtendedReal(v) : ExtendedReal::pos_inf();
  }
  if (y >= 0.0) return ExtendedReal::pos_inf();
  const double v = std::pow((1.0 - a) * -y, -1.0 / (1.0 - a));
  return std::isfinite(v) ? ExtendedReal(v) : ExtendedReal::pos_inf();
}

bool in_conj_interior(const FDivergenceFamily& family, double y) {
  if (!std::isfinite(y)) return false;
  if (family.is_kl()) return y - 1.0 <= kMaxExponent;
  if (family.alpha_value() > 1.0) return conj_eval(family, y).is_finite();
  return y < 0.0 && conj_eval(family, y).is_finite();
}

}  // namespace drovar
