#pragma once

#include "amplab/model.hpp"

namespace amplab {

// Three-branch soft threshold; the weak derivative at |s| == theta is taken
// as 0, matching the closed zero branch. theta >= 0 required.
double soft_threshold(double s, double theta);
double soft_threshold_deriv(double s, double theta);

// Conditional-mean denoiser for the Rademacher prior: tanh(s / tau_sq).
double tanh_denoiser(double s, double tau_sq);
double tanh_denoiser_deriv(double s, double tau_sq);

/// Conditional mean E[beta | beta + tau Z = s] for the Bernoulli-Gaussian
/// prior with P(beta != 0) = xi and component variance v. Closed form via
/// Bayes' rule, evaluated with log-densities so large |s| stays stable.
/// xi == 1 is admitted and reduces to pure Gaussian linear shrinkage.
double bg_cond_mean(double s, double tau_sq, double xi, double v);
double bg_cond_mean_deriv(double s, double tau_sq, double xi, double v);

enum class DenoiserFamily { SoftThreshold, TanhBayes, BernoulliGaussianBayes, Identity, Zero };

enum class TauSource { SeTrace, Online };

/// Scalar denoiser family applied entrywise to the effective observation.
/// The per-iteration noise parameter tau_t^2 comes either from the state
/// evolution trace or from the online estimate ||z^t||^2 / n.
struct Denoiser {
  DenoiserFamily family = DenoiserFamily::SoftThreshold;
  double alpha = 1.5;      // SoftThreshold: theta_t = alpha * tau_t
  double sparsity = 0.1;   // BernoulliGaussianBayes xi
  double variance = 1.0;   // BernoulliGaussianBayes v
  TauSource tau_source = TauSource::SeTrace;

  static Denoiser soft_threshold(double alpha);
  static Denoiser tanh_bayes();
  static Denoiser bernoulli_gaussian_bayes(double sparsity, double variance);
  static Denoiser identity();
  static Denoiser zero();

  double eval(double s, double tau_sq) const;
  double deriv(double s, double tau_sq) const;

  // Lipschitz constant in the first argument. SoftThreshold/Identity: 1,
  // Zero: 0, TanhBayes: 1/tau_sq. BernoulliGaussianBayes has no simple
  // closed form; the returned certificate is a fine grid maximum of the
  // derivative with a small safety margin.
  double lipschitz(double tau_sq) const;

  void validate() const;
};

struct DenoiseResult {
  Vector values;
  double mean_deriv;  // (1/n) sum_i eta'(v_i): the Onsager sum normalization
};

// Entrywise application plus the derivative sum. Throws NumericError if the
// input or output contains non-finite entries.
DenoiseResult apply_denoiser(const Denoiser& d, const Vector& v, double tau_sq, Index n);

/// The pair (f_t, g_t) of the general recursion, specialized to AMP:
///   f_t(a, beta) = eta_{t-1}(beta - a) - beta   (t >= 1),
///   f_0(a, beta) = -beta                        (zero initial estimate),
///   g_t(a, w)    = a - w,  g_t' == 1.
/// Derivatives are with respect to the first argument.
struct GeneralFunctions {
  Denoiser denoiser;

  double f(int t, double a, double beta, double tau_prev_sq) const;
  double f_deriv(int t, double a, double beta, double tau_prev_sq) const;
  static double g(double a, double w) { return a - w; }
  static double g_deriv(double /*a*/, double /*w*/) { return 1.0; }
};

GeneralFunctions to_general_functions(const Denoiser& d);

}  // namespace amplab
