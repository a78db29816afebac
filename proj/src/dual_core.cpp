#include "drovar/dual_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "drovar/errors.hpp"

namespace drovar {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kMaxExponent = 700.0;

void require_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    std::ostringstream msg;
    msg << what << ": length mismatch (" << a << " vs " << b << ")";
    throw ValidationError(msg.str());
  }
}

/// Expectations of f* and (f*)' under P at Psi_i = (psi_i - nu phi_i - beta) / lambda.
struct ConjMoments {
  ExtendedReal mean_conj = 0.0;
  /// E[(f*)'(Psi)]
  double mean_deriv = 0.0;
  /// E[(f*)'(Psi) Psi - f*(Psi)] == E[f((f*)'(Psi))]
  double mean_legendre = 0.0;
  /// E[(f*)'(Psi) phi]
  double mean_deriv_phi = 0.0;
  /// Every Psi_i lies in the interior of dom f*.
  bool interior = true;
};

double conj_argument(double lambda, double beta, double nu, double psi, double phi) {
  return (psi - nu * phi - beta) / lambda;
}

// Log-space evaluation: E_P[exp(Psi - 1)] = exp(M - 1) E_P[exp(Psi - M)], M = max Psi.
ConjMoments kl_moments(double lambda, double beta, double nu, std::span<const double> psi,
                       std::span<const double> phi, const EmpiricalMeasure& p,
                       bool with_derivs) {
  const std::size_t n = psi.size();
  std::vector<double> args(n);
  double max_arg = -kInf;
  for (std::size_t i = 0; i < n; ++i) {
    args[i] = conj_argument(lambda, beta, nu, psi[i], phi.empty() ? 0.0 : phi[i]);
    max_arg = std::max(max_arg, args[i]);
  }
  CompensatedSum mass;
  for (std::size_t i = 0; i < n; ++i) mass.add(p[i] * std::exp(args[i] - max_arg));
  const double log_mean = max_arg - 1.0 + std::log(mass.result());

  ConjMoments out;
  if (!(log_mean <= kMaxExponent) || !std::isfinite(max_arg)) {
    out.mean_conj = ExtendedReal::pos_inf();
    out.interior = false;
    return out;
  }
  const double mean = std::exp(log_mean);
  out.mean_conj = mean;
  if (!with_derivs) return out;

  // Normalized tilt weights w_i = p_i exp(Psi_i - M) / mass.
  CompensatedSum legendre;
  CompensatedSum deriv_phi;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = p[i] * std::exp(args[i] - max_arg) / mass.result();
    legendre.add(w * (args[i] - 1.0));
    if (!phi.empty()) deriv_phi.add(w * phi[i]);
  }
  out.mean_deriv = mean;
  out.mean_legendre = mean * legendre.result();
  out.mean_deriv_phi = mean * deriv_phi.result();
  return out;
}

ConjMoments generic_moments(double lambda, double beta, double nu, std::span<const double> psi,
                            std::span<const double> phi, const EmpiricalMeasure& p,
                            const FDivergenceFamily& family, bool with_derivs) {
  ConjMoments out;
  CompensatedSum conj;
  CompensatedSum deriv;
  CompensatedSum legendre;
  CompensatedSum deriv_phi;
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double phi_i = phi.empty() ? 0.0 : phi[i];
    const double y = conj_argument(lambda, beta, nu, psi[i], phi_i);
    const ExtendedReal c = conj_eval(family, y);
    if (!c.is_finite()) {
      out.mean_conj = ExtendedReal::pos_inf();
      out.interior = false;
      return out;
    }
    conj.add(p[i] * c.value());
    if (with_derivs) {
      if (!in_conj_interior(family, y)) out.interior = false;
      const double d = conj_deriv(family, y).value();
      deriv.add(p[i] * d);
      legendre.add(p[i] * (d * y - c.value()));
      deriv_phi.add(p[i] * d * phi_i);
    }
  }
  out.mean_conj = conj.result();
  out.mean_deriv = deriv.result();
  out.mean_legendre = legendre.result();
  out.mean_deriv_phi = deriv_phi.result();
  return out;
}

ConjMoments conj_moments(double lambda, double beta, double nu, std::span<const double> psi,
                         std::span<const double> phi, const EmpiricalMeasure& p,
                         const FDivergenceFamily& family, bool with_derivs) {
  if (family.is_kl()) return kl_moments(lambda, beta, nu, psi, phi, p, with_derivs);
  return generic_moments(lambda, beta, nu, psi, phi, p, family, with_derivs);
}

// offset + beta + eta lambda + lambda E_P[f*(Psi)]
ExtendedReal assemble(double offset, double lambda, double beta, double eta,
                      ExtendedReal mean_conj) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) return ExtendedReal::pos_inf();
  if (mean_conj.is_pos_inf()) return ExtendedReal::pos_inf();
  return ExtendedReal(offset + beta + eta * lambda + lambda * mean_conj.value());
}

/// log E_P[exp(m_i / lambda)] together with the normalized tilt weights.
struct LogMeanExp {
  double log_mean;
  std::vector<double> weights;
};

LogMeanExp log_mean_exp(double lambda, std::span<const double> m, const EmpiricalMeasure& p) {
  const std::size_t n = m.size();
  double max_arg = -kInf;
  for (std::size_t i = 0; i < n; ++i) max_arg = std::max(max_arg, m[i] / lambda);
  CompensatedSum mass;
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = p[i] * std::exp(m[i] / lambda - max_arg);
    mass.add(w[i]);
  }
  for (double& wi : w) wi /= mass.result();
  return {max_arg + std::log(mass.result()), std::move(w)};
}

std::vector<double> centered_integrand(double nu, const ProblemData& data) {
  std::vector<double> m(data.size());
  for (std::size_t i = 0; i < m.size(); ++i) {
    m[i] = data.rho()[i] + data.phi()[i] * data.phi()[i] - nu * data.phi()[i];
  }
  return m;
}

struct AlphaConstants {
  double alpha;
  double k;    // alpha / (1 - alpha)
  double cap;  // 1 / (alpha (1 - alpha))
  double c_scale;  // alpha (1 - alpha)^k
};

AlphaConstants alpha_constants(double alpha) {
  const double k = alpha / (1.0 - alpha);
  return {alpha, k, 1.0 / (alpha * (1.0 - alpha)), alpha * std::pow(1.0 - alpha, k)};
}

void validate_alpha_reduced(double alpha, double eta) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw ValidationError("alpha-reduced objective needs alpha in (0,1)");
  }
  validate_eta(FDivergenceFamily::alpha(alpha), eta);
}

/// C_{beta,nu} and its beta-derivative moments; C is +inf when some atom has
/// a nonnegative integrand.
struct AlphaMoments {
  bool feasible = false;
  double c = kInf;
  double dc_dbeta = 0.0;
  double dc_dnu = 0.0;
};

AlphaMoments alpha_moments(double beta, double nu, const ProblemData& data,
                           const EmpiricalMeasure& p, const AlphaConstants& ac) {
  const std::vector<double> m = centered_integrand(nu, data);
  CompensatedSum c;
  CompensatedSum dbeta;
  CompensatedSum dnu;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double mi = m[i] - beta;
    if (!(mi < 0.0)) return {};
    const double a = -mi;
    const double pow_k = std::pow(a, -ac.k);
    c.add(p[i] * pow_k);
    dbeta.add(p[i] * pow_k / a);
    dnu.add(p[i] * pow_k / a * data.phi()[i]);
  }
  AlphaMoments out;
  out.feasible = true;
  out.c = c.result() / ac.c_scale;
  out.dc_dbeta = -ac.k * dbeta.result() / ac.c_scale;
  out.dc_dnu = -ac.k * dnu.result() / ac.c_scale;
  return out;
}

// -alpha ((1 - alpha) / C)^{(1-alpha)/alpha} (cap - eta)^{1/alpha}
double alpha_penalty(double c, const AlphaConstants& ac, double eta) {
  if (!std::isfinite(c)) return 0.0;
  const double a = ac.alpha;
  return -a * std::pow((1.0 - a) / c, (1.0 - a) / a) * std::pow(ac.cap - eta, 1.0 / a);
}

}  // namespace

ConjugatePair ConjugatePair::quarter_square() {
  return {[](double z) { return z * z; }, [](double nu) { return nu * nu / 4.0; },
          [](double nu) { return nu / 2.0; }};
}

ConjugatePair ConjugatePair::quartic() {
  return {[](double z) { return z * z * z * z / 4.0; },
          [](double nu) { return 0.75 * std::pow(std::abs(nu), 4.0 / 3.0); },
          [](double nu) { return std::copysign(std::cbrt(std::abs(nu)), nu); }};
}

bool satisfies_fenchel_young(const ConjugatePair& pair, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-5.0, 5.0);
  for (int i = 0; i < 100; ++i) {
    const double z = unif(rng);
    const double nu = unif(rng);
    if (pair.g(z) + pair.g_conj(nu) < z * nu - 1e-9) return false;
  }
  return true;
}

void validate_eta(const FDivergenceFamily& family, double eta) {
  if (!(eta > 0.0) || !std::isfinite(eta)) {
    throw ValidationError("eta must be a positive finite number");
  }
  if (!(ExtendedReal(eta) < family.divergence_cap())) {
    std::ostringstream msg;
    msg << "eta must be below the divergence cap " << family.divergence_cap() << " for "
        << family.to_string();
    throw ValidationError(msg.str());
  }
}

ExtendedReal dual_objective_general(const DualPoint& dp, std::span<const double> psi,
                                    std::span<const double> phi, const ConjugatePair& pair,
                                    const EmpiricalMeasure& p, const FDivergenceFamily& family,
                                    double eta) {
  validate_eta(family, eta);
  require_aligned(psi.size(), p.size(), "dual objective psi/p");
  require_aligned(phi.size(), p.size(), "dual objective phi/p");
  const ConjMoments mom = conj_moments(dp.lambda, dp.beta, dp.nu, psi, phi, p, family, false);
  return assemble(pair.g_conj(dp.nu), dp.lambda, dp.beta, eta, mom.mean_conj);
}

ExtendedReal dual_objective_variance(const DualPoint& dp, const ProblemData& data,
                                     const EmpiricalMeasure& p, const FDivergenceFamily& family,
                                     double eta) {
  static const ConjugatePair kPair = ConjugatePair::quarter_square();
  const std::vector<double> psi = data.psi();
  return dual_objective_general(dp, psi, data.phi(), kPair, p, family, eta);
}

ExtendedReal dual_objective_mean(double lambda, double beta, std::span<const double> values,
                                 const EmpiricalMeasure& p, const FDivergenceFamily& family,
                                 double eta) {
  validate_eta(family, eta);
  require_aligned(values.size(), p.size(), "mean objective values/p");
  const ConjMoments mom = conj_moments(lambda, beta, 0.0, values, {}, p, family, false);
  return assemble(0.0, lambda, beta, eta, mom.mean_conj);
}

double kl_reduced_objective(double lambda, double nu, const ProblemData& data,
                            const EmpiricalMeasure& p, double eta) {
  validate_eta(FDivergenceFamily::kl(), eta);
  require_aligned(data.size(), p.size(), "KL objective data/p");
  if (!(lambda > 0.0)) return kInf;
  const std::vector<double> m = centered_integrand(nu, data);
  const LogMeanExp lme = log_mean_exp(lambda, m, p);
  return nu * nu / 4.0 + eta * lambda + lambda * lme.log_mean;
}

double kl_optimal_beta(double lambda, double nu, const ProblemData& data,
                       const EmpiricalMeasure& p) {
  require_aligned(data.size(), p.size(), "KL beta data/p");
  const std::vector<double> m = centered_integrand(nu, data);
  return lambda * (log_mean_exp(lambda, m, p).log_mean - 1.0);
}

DualGradient gradient_kl_reduced(double lambda, double nu, const ProblemData& data,
                                 const EmpiricalMeasure& p, double eta) {
  validate_eta(FDivergenceFamily::kl(), eta);
  require_aligned(data.size(), p.size(), "KL gradient data/p");
  const std::vector<double> m = centered_integrand(nu, data);
  const LogMeanExp lme = log_mean_exp(lambda, m, p);
  // d/dlambda = eta - KL(w || p), with log(w_i / p_i) = m_i / lambda - L.
  CompensatedSum kl;
  CompensatedSum mean_phi;
  for (std::size_t i = 0; i < m.size(); ++i) {
    kl.add(lme.weights[i] * (m[i] / lambda - lme.log_mean));
    mean_phi.add(lme.weights[i] * data.phi()[i]);
  }
  return {eta - kl.result(), 0.0, nu / 2.0 - mean_phi.result()};
}

ExtendedReal alpha_reduced_objective(double beta, double nu, const ProblemData& data,
                                     const EmpiricalMeasure& p, double alpha, double eta) {
  validate_alpha_reduced(alpha, eta);
  require_aligned(data.size(), p.size(), "alpha objective data/p");
  const AlphaConstants ac = alpha_constants(alpha);
  const AlphaMoments mom = alpha_moments(beta, nu, data, p, ac);
  if (!mom.feasible) return ExtendedReal::pos_inf();
  return nu * nu / 4.0 + beta + alpha_penalty(mom.c, ac, eta);
}

double alpha_optimal_lambda(double beta, double nu, const ProblemData& data,
                            const EmpiricalMeasure& p, double alpha, double eta) {
  validate_alpha_reduced(alpha, eta);
  const AlphaConstants ac = alpha_constants(alpha);
  const AlphaMoments mom = alpha_moments(beta, nu, data, p, ac);
  if (!mom.feasible) throw ValidationError("alpha_optimal_lambda: (beta, nu) is infeasible");
  if (!std::isfinite(mom.c)) return 0.0;
  return std::pow((ac.cap - eta) * (1.0 - alpha) / mom.c, 1.0 / ac.k);
}

DualGradient gradient_alpha_reduced(double beta, double nu, const ProblemData& data,
                                    const EmpiricalMeasure& p, double alpha, double eta) {
  validate_alpha_reduced(alpha, eta);
  require_aligned(data.size(), p.size(), "alpha gradient data/p");
  const AlphaConstants ac = alpha_constants(alpha);
  const AlphaMoments mom = alpha_moments(beta, nu, data, p, ac);
  if (!mom.feasible || !std::isfinite(mom.c) || !std::isfinite(mom.dc_dbeta) || !std::isfinite(mom.dc_dnu)) {
    throw NonsmoothPointError(
        "alpha-reduced objective is infinite here; use the derivative-free path");
  }
  const double penalty = alpha_penalty(mom.c, ac, eta);
  const double dpen_dc = -penalty * (1.0 - alpha) / (alpha * mom.c);
  return {0.0, 1.0 + dpen_dc * mom.dc_dbeta, nu / 2.0 + dpen_dc * mom.dc_dnu};
}

DualGradient gradient_general(const DualPoint& dp, std::span<const double> psi,
                              std::span<const double> phi, const ConjugatePair& pair,
                              const EmpiricalMeasure& p, const FDivergenceFamily& family,
                              double eta) {
  validate_eta(family, eta);
  require_aligned(psi.size(), p.size(), "gradient psi/p");
  require_aligned(phi.size(), p.size(), "gradient phi/p");
  const ConjMoments mom = conj_moments(dp.lambda, dp.beta, dp.nu, psi, phi, p, family, true);
  if (!mom.interior || !(dp.lambda > 0.0)) {
    throw NonsmoothPointError(
        "dual objective is not smooth at this point; use the derivative-free path");
  }
  return {eta - mom.mean_legendre, 1.0 - mom.mean_deriv,
          pair.g_conj_deriv(dp.nu) - mom.mean_deriv_phi};
}

DualGradient gradient_variance(const DualPoint& dp, const ProblemData& data,
                               const EmpiricalMeasure& p, const FDivergenceFamily& family,
                               double eta) {
  static const ConjugatePair kPair = ConjugatePair::quarter_square();
  const std::vector<double> psi = data.psi();
  return gradient_general(dp, psi, data.phi(), kPair, p, family, eta);
}

DualGradient gradient_mean(double lambda, double beta, std::span<const double> values,
                           const EmpiricalMeasure& p, const FDivergenceFamily& family,
                           double eta) {
  validate_eta(family, eta);
  require_aligned(values.size(), p.size(), "mean gradient values/p");
  const ConjMoments mom = conj_moments(lambda, beta, 0.0, values, {}, p, family, true);
  if (!mom.interior || !(lambda > 0.0)) {
    throw NonsmoothPointError(
        "mean objective is not smooth at this point; use the derivative-free path");
  }
  return {eta - mom.mean_legendre, 1.0 - mom.mean_deriv, 0.0};
}

namespace {

TiltResult tilt_impl(double lambda, double beta, double nu, std::span<const double> psi,
                     std::span<const double> phi, const EmpiricalMeasure& p,
                     const FDivergenceFamily& family) {
  TiltResult out;
  out.weights.resize(psi.size());
  out.psi.resize(psi.size());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    const double y = conj_argument(lambda, beta, nu, psi[i], phi.empty() ? 0.0 : phi[i]);
    const ExtendedReal c = conj_eval(family, y);
    const ExtendedReal d = conj_deriv(family, y);
    if (!c.is_finite() || !d.is_finite()) {
      throw NonsmoothPointError("tilt: conjugate argument outside dom f* at atom " +
                                std::to_string(i));
    }
    out.psi[i] = y;
    out.weights[i] = p[i] * d.value();
  }
  return out;
}

}  // namespace

TiltResult tilt(const DualPoint& dp, const ProblemData& data, const EmpiricalMeasure& p,
                const FDivergenceFamily& family) {
  require_aligned(data.size(), p.size(), "tilt data/p");
  const std::vector<double> psi = data.psi();
  return tilt_impl(dp.lambda, dp.beta, dp.nu, psi, data.phi(), p, family);
}

TiltResult tilt_mean(double lambda, double beta, std::span<const double> values,
                     const EmpiricalMeasure& p, const FDivergenceFamily& family) {
  require_aligned(values.size(), p.size(), "tilt values/p");
  return tilt_impl(lambda, beta, 0.0, values, {}, p, family);
}

Diagnostics optimality_diagnostics(const DualPoint& dp, const ProblemData& data,
                                   const EmpiricalMeasure& p, const FDivergenceFamily& family,
                                   double eta, bool boundary_flag) {
  (void)eta;
  Diagnostics diag;
  diag.boundary_flag = boundary_flag;
  try {
    const TiltResult t = tilt(dp, data, p, family);
    diag.normalization = compensated_sum(t.weights);
    diag.achieved_divergence = divergence_of(t.weights, p, family);
    diag.mean_condition_gap = weighted_sum(t.weights, data.phi()) - dp.nu / 2.0;
  } catch (const NonsmoothPointError&) {
    diag.normalization = kInf;
    diag.achieved_divergence = ExtendedReal::pos_inf();
    diag.mean_condition_gap = kInf;
  }
  return diag;
}

}  // namespace drovar
