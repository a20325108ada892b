#include "amplab/denoise.hpp"

#include <cmath>
#include <stdexcept>

#include "amplab/errors.hpp"

namespace amplab {

double soft_threshold(double s, double theta) {
  if (theta < 0.0) throw std::invalid_argument("soft_threshold: theta must be >= 0");
  if (s > theta) return s - theta;
  if (s < -theta) return s + theta;
  return 0.0;
}

double soft_threshold_deriv(double s, double theta) {
  if (theta < 0.0) throw std::invalid_argument("soft_threshold: theta must be >= 0");
  return (s > theta || s < -theta) ? 1.0 : 0.0;
}

double tanh_denoiser(double s, double tau_sq) {
  if (!(tau_sq > 0.0)) throw std::invalid_argument("tanh_denoiser: tau_sq must be > 0");
  return std::tanh(s / tau_sq);
}

double tanh_denoiser_deriv(double s, double tau_sq) {
  if (!(tau_sq > 0.0)) throw std::invalid_argument("tanh_denoiser: tau_sq must be > 0");
  const double t = std::tanh(s / tau_sq);
  return (1.0 - t * t) / tau_sq;
}

namespace {

void check_bg_params(double tau_sq, double xi, double v) {
  if (!(tau_sq > 0.0)) throw std::invalid_argument("bg_cond_mean: tau_sq must be > 0");
  if (!(xi > 0.0 && xi <= 1.0)) throw std::invalid_argument("bg_cond_mean: xi must lie in (0,1]");
  if (!(v > 0.0)) throw std::invalid_argument("bg_cond_mean: v must be > 0");
}

// Posterior weight of the Gaussian component given s, computed from
// log-density differences.
double bg_gauss_posterior_prob(double s, double tau_sq, double xi, double v) {
  if (xi == 1.0) return 1.0;
  const double c0 = tau_sq;      // variance under the zero atom
  const double c1 = v + tau_sq;  // variance under the Gaussian component
  const double l0 = std::log1p(-xi) - 0.5 * std::log(c0) - 0.5 * s * s / c0;
  const double l1 = std::log(xi) - 0.5 * std::log(c1) - 0.5 * s * s / c1;
  // 1 / (1 + exp(l0 - l1))
  return 1.0 / (1.0 + std::exp(l0 - l1));
}

}  // namespace

double bg_cond_mean(double s, double tau_sq, double xi, double v) {
  check_bg_params(tau_sq, xi, v);
  const double shrink = v / (v + tau_sq);
  return bg_gauss_posterior_prob(s, tau_sq, xi, v) * shrink * s;
}

double bg_cond_mean_deriv(double s, double tau_sq, double xi, double v) {
  check_bg_params(tau_sq, xi, v);
  // eta'(s) = Var(beta | s) / tau_sq.
  const double shrink = v / (v + tau_sq);
  const double p = bg_gauss_posterior_prob(s, tau_sq, xi, v);
  const double mean = p * shrink * s;
  const double second = p * (shrink * tau_sq + shrink * shrink * s * s);
  return (second - mean * mean) / tau_sq;
}

Denoiser Denoiser::soft_threshold(double alpha) {
  Denoiser d;
  d.family = DenoiserFamily::SoftThreshold;
  d.alpha = alpha;
  d.validate();
  return d;
}

Denoiser Denoiser::tanh_bayes() {
  Denoiser d;
  d.family = DenoiserFamily::TanhBayes;
  return d;
}

Denoiser Denoiser::bernoulli_gaussian_bayes(double sparsity, double variance) {
  Denoiser d;
  d.family = DenoiserFamily::BernoulliGaussianBayes;
  d.sparsity = sparsity;
  d.variance = variance;
  d.validate();
  return d;
}

Denoiser Denoiser::identity() {
  Denoiser d;
  d.family = DenoiserFamily::Identity;
  return d;
}

Denoiser Denoiser::zero() {
  Denoiser d;
  d.family = DenoiserFamily::Zero;
  return d;
}

void Denoiser::validate() const {
  switch (family) {
    case DenoiserFamily::SoftThreshold:
      if (!(alpha > 0.0)) throw std::invalid_argument("soft threshold tuning alpha must be > 0");
      break;
    case DenoiserFamily::BernoulliGaussianBayes:
      if (!(sparsity > 0.0 && sparsity < 1.0))
        throw std::invalid_argument("Bernoulli-Gaussian denoiser sparsity must lie in (0,1)");
      if (!(variance > 0.0))
        throw std::invalid_argument("Bernoulli-Gaussian denoiser variance must be > 0");
      break;
    default:
      break;
  }
}

double Denoiser::eval(double s, double tau_sq) const {
  switch (family) {
    case DenoiserFamily::SoftThreshold:
      return amplab::soft_threshold(s, alpha * std::sqrt(tau_sq));
    case DenoiserFamily::TanhBayes:
      return tanh_denoiser(s, tau_sq);
    case DenoiserFamily::BernoulliGaussianBayes:
      return bg_cond_mean(s, tau_sq, sparsity, variance);
    case DenoiserFamily::Identity:
      return s;
    case DenoiserFamily::Zero:
      return 0.0;
  }
  return 0.0;
}

double Denoiser::deriv(double s, double tau_sq) const {
  switch (family) {
    case DenoiserFamily::SoftThreshold:
      return soft_threshold_deriv(s, alpha * std::sqrt(tau_sq));
    case DenoiserFamily::TanhBayes:
      return tanh_denoiser_deriv(s, tau_sq);
    case DenoiserFamily::BernoulliGaussianBayes:
      return bg_cond_mean_deriv(s, tau_sq, sparsity, variance);
    case DenoiserFamily::Identity:
      return 1.0;
    case DenoiserFamily::Zero:
      return 0.0;
  }
  return 0.0;
}

double Denoiser::lipschitz(double tau_sq) const {
  switch (family) {
    case DenoiserFamily::SoftThreshold:
    case DenoiserFamily::Identity:
      return 1.0;
    case DenoiserFamily::Zero:
      return 0.0;
    case DenoiserFamily::TanhBayes:
      return 1.0 / tau_sq;
    case DenoiserFamily::BernoulliGaussianBayes: {
      const double span = 20.0 * std::sqrt(variance + tau_sq);
      double sup = 0.0;
      const int grid = 20001;
      for (int i = 0; i < grid; ++i) {
        const double s = -span + 2.0 * span * i / (grid - 1);
        sup = std::max(sup, bg_cond_mean_deriv(s, tau_sq, sparsity, variance));
      }
      return sup * (1.0 + 1e-6);
    }
  }
  return 0.0;
}

DenoiseResult apply_denoiser(const Denoiser& d, const Vector& v, double tau_sq, Index n) {
  if (n < 1) throw std::invalid_argument("apply_denoiser: n must be positive");
  if (!v.allFinite()) throw NumericError("apply_denoiser: non-finite input");
  DenoiseResult out;
  out.values.resize(v.size());
  double deriv_sum = 0.0;
  for (Index i = 0; i < v.size(); ++i) {
    out.values[i] = d.eval(v[i], tau_sq);
    deriv_sum += d.deriv(v[i], tau_sq);
  }
  if (!out.values.allFinite() || !std::isfinite(deriv_sum))
    throw NumericError("apply_denoiser: non-finite output");
  out.mean_deriv = deriv_sum / static_cast<double>(n);
  return out;
}

double GeneralFunctions::f(int t, double a, double beta, double tau_prev_sq) const {
  if (t == 0) return -beta;
  return denoiser.eval(beta - a, tau_prev_sq) - beta;
}

double GeneralFunctions::f_deriv(int t, double a, double beta, double tau_prev_sq) const {
  if (t == 0) return 0.0;
  return -denoiser.deriv(beta - a, tau_prev_sq);
}

GeneralFunctions to_general_functions(const Denoiser& d) { return GeneralFunctions{d}; }

}  // namespace amplab
