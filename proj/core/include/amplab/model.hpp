#pragma once

#include <Eigen/Core>
#include <vector>

#include "amplab/rng.hpp"

namespace amplab {

// Dense row-major 64-bit storage throughout; problem sizes stay at desk scale.
using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

enum class PriorKind { Rademacher, BernoulliGaussian, Gaussian, PointMass };

/// Zero-mean sub-Gaussian signal prior. Only the enumerated families are
/// supported; each has a closed-form second moment and a closed-form
/// conditional-mean denoiser.
struct SignalPrior {
  PriorKind kind = PriorKind::Rademacher;
  double sparsity = 0.1;   // BernoulliGaussian: P(beta != 0), strictly in (0,1)
  double variance = 1.0;   // BernoulliGaussian / Gaussian component variance
  std::vector<double> values;  // PointMass support
  std::vector<double> probs;   // PointMass probabilities (sum to 1 within 1e-12)

  static SignalPrior rademacher();
  static SignalPrior bernoulli_gaussian(double sparsity, double variance);
  static SignalPrior gaussian(double variance);
  static SignalPrior point_mass(std::vector<double> values, std::vector<double> probs);

  // Exact analytic E[beta^2]; strictly positive for a valid prior.
  double second_moment() const;

  // Throws std::invalid_argument on violated invariants (zero second moment,
  // sparsity outside (0,1), probabilities not summing to 1, nonzero mean).
  void validate() const;
};

enum class NoiseKind { Gaussian, Uniform, Rademacher };

/// Zero-mean measurement noise: Gaussian, centered uniform, or a Rademacher
/// variable scaled to the requested variance. variance == 0 gives the
/// noiseless model.
struct NoiseSpec {
  NoiseKind kind = NoiseKind::Gaussian;
  double variance = 0.0;

  void validate() const;
};

/// One realization of the regression model y = A beta0 + w.
struct ProblemInstance {
  Matrix A;       // n x N, entries i.i.d. N(0, 1/n)
  Vector beta0;   // length N
  Vector w;       // length n
  Vector y;       // length n, y = A beta0 + w
  Index n = 0;
  Index N = 0;
  double delta = 0.0;  // n / N
};

// Deterministic given the seed plan; entries i.i.d. N(0, 1/n), filled in
// row-major order.
Matrix sample_matrix(Index n, Index N, const SeedPlan& seed);

Vector sample_signal(const SignalPrior& prior, Index N, const SeedPlan& seed);

Vector sample_noise(const NoiseSpec& noise, Index n, const SeedPlan& seed);

ProblemInstance build_instance(const SignalPrior& prior, const NoiseSpec& noise,
                               Index n, Index N, const SeedPlan& seed);

inline double prior_second_moment(const SignalPrior& prior) { return prior.second_moment(); }

}  // namespace amplab
