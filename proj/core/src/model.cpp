#include "amplab/model.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

namespace amplab {

SignalPrior SignalPrior::rademacher() {
  SignalPrior p;
  p.kind = PriorKind::Rademacher;
  return p;
}

SignalPrior SignalPrior::bernoulli_gaussian(double sparsity, double variance) {
  SignalPrior p;
  p.kind = PriorKind::BernoulliGaussian;
  p.sparsity = sparsity;
  p.variance = variance;
  p.validate();
  return p;
}

SignalPrior SignalPrior::gaussian(double variance) {
  SignalPrior p;
  p.kind = PriorKind::Gaussian;
  p.variance = variance;
  p.validate();
  return p;
}

SignalPrior SignalPrior::point_mass(std::vector<double> values, std::vector<double> probs) {
  SignalPrior p;
  p.kind = PriorKind::PointMass;
  p.values = std::move(values);
  p.probs = std::move(probs);
  p.validate();
  return p;
}

double SignalPrior::second_moment() const {
  switch (kind) {
    case PriorKind::Rademacher:
      return 1.0;
    case PriorKind::BernoulliGaussian:
      return sparsity * variance;
    case PriorKind::Gaussian:
      return variance;
    case PriorKind::PointMass: {
      double m2 = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) m2 += probs[i] * values[i] * values[i];
      return m2;
    }
  }
  return 0.0;
}

void SignalPrior::validate() const {
  switch (kind) {
    case PriorKind::Rademacher:
      break;
    case PriorKind::BernoulliGaussian:
      if (!(sparsity > 0.0 && sparsity < 1.0))
        throw std::invalid_argument("BernoulliGaussian sparsity must lie strictly in (0,1)");
      if (!(variance > 0.0) || !std::isfinite(variance))
        throw std::invalid_argument("BernoulliGaussian component variance must be positive");
      break;
    case PriorKind::Gaussian:
      if (!(variance > 0.0) || !std::isfinite(variance))
        throw std::invalid_argument("Gaussian prior variance must be positive");
      break;
    case PriorKind::PointMass: {
      if (values.empty() || values.size() != probs.size())
        throw std::invalid_argument("PointMass prior needs matching values/probs");
      double psum = 0.0, mean = 0.0;
      for (std::size_t i = 0; i < values.size(); ++i) {
        if (probs[i] < 0.0) throw std::invalid_argument("PointMass probabilities must be nonnegative");
        psum += probs[i];
        mean += probs[i] * values[i];
      }
      if (std::abs(psum - 1.0) > 1e-12)
        throw std::invalid_argument("PointMass probabilities must sum to 1 within 1e-12");
      if (std::abs(mean) > 1e-12)
        throw std::invalid_argument("PointMass prior must be zero-mean");
      break;
    }
  }
  if (!(second_moment() > 0.0))
    throw std::invalid_argument("signal prior must have strictly positive second moment");
}

void NoiseSpec::validate() const {
  if (!(variance >= 0.0) || !std::isfinite(variance))
    throw std::invalid_argument("noise variance must be finite and nonnegative");
}

Matrix sample_matrix(Index n, Index N, const SeedPlan& seed) {
  if (n < 1 || N < 1) throw std::invalid_argument("sample_matrix: dimensions must be positive");
  SplitMix64 gen = seed.generator(Stream::Matrix);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  Matrix A(n, N);
  double* data = A.data();  // row-major fill order
  const Index total = n * N;
  for (Index i = 0; i < total; ++i) data[i] = scale * gen.next_gaussian();
  return A;
}

Vector sample_signal(const SignalPrior& prior, Index N, const SeedPlan& seed) {
  if (N < 1) throw std::invalid_argument("sample_signal: N must be positive");
  prior.validate();
  SplitMix64 gen = seed.generator(Stream::Signal);
  Vector beta(N);
  switch (prior.kind) {
    case PriorKind::Rademacher:
      for (Index i = 0; i < N; ++i) beta[i] = (gen.next() >> 63) ? 1.0 : -1.0;
      break;
    case PriorKind::BernoulliGaussian: {
      const double sd = std::sqrt(prior.variance);
      for (Index i = 0; i < N; ++i) {
        const double u = gen.next_double();
        // Draw the Gaussian unconditionally to keep the consumed stream
        // length independent of the Bernoulli outcome.
        const double g = gen.next_gaussian();
        beta[i] = (u < prior.sparsity) ? sd * g : 0.0;
      }
      break;
    }
    case PriorKind::Gaussian: {
      const double sd = std::sqrt(prior.variance);
      for (Index i = 0; i < N; ++i) beta[i] = sd * gen.next_gaussian();
      break;
    }
    case PriorKind::PointMass: {
      std::vector<double> cdf(prior.probs.size());
      std::partial_sum(prior.probs.begin(), prior.probs.end(), cdf.begin());
      for (Index i = 0; i < N; ++i) {
        const double u = gen.next_double();
        std::size_t k = 0;
        while (k + 1 < cdf.size() && u >= cdf[k]) ++k;
        beta[i] = prior.values[k];
      }
      break;
    }
  }
  return beta;
}

Vector sample_noise(const NoiseSpec& noise, Index n, const SeedPlan& seed) {
  if (n < 1) throw std::invalid_argument("sample_noise: n must be positive");
  noise.validate();
  if (noise.variance == 0.0) return Vector::Zero(n);
  SplitMix64 gen = seed.generator(Stream::Noise);
  Vector w(n);
  switch (noise.kind) {
    case NoiseKind::Gaussian: {
      const double sd = std::sqrt(noise.variance);
      for (Index i = 0; i < n; ++i) w[i] = sd * gen.next_gaussian();
      break;
    }
    case NoiseKind::Uniform: {
      // Var(U(-a,a)) = a^2/3.
      const double a = std::sqrt(3.0 * noise.variance);
      for (Index i = 0; i < n; ++i) w[i] = a * (2.0 * gen.next_double() - 1.0);
      break;
    }
    case NoiseKind::Rademacher: {
      const double s = std::sqrt(noise.variance);
      for (Index i = 0; i < n; ++i) w[i] = (gen.next() >> 63) ? s : -s;
      break;
    }
  }
  return w;
}

ProblemInstance build_instance(const SignalPrior& prior, const NoiseSpec& noise,
                               Index n, Index N, const SeedPlan& seed) {
  ProblemInstance inst;
  inst.A = sample_matrix(n, N, seed);
  inst.beta0 = sample_signal(prior, N, seed);
  inst.w = sample_noise(noise, n, seed);
  inst.y = inst.A * inst.beta0 + inst.w;
  inst.n = n;
  inst.N = N;
  inst.delta = static_cast<double>(n) / static_cast<double>(N);
  return inst;
}

}  // namespace amplab
