#pragma once

// Test-only oracles, independent of the quadrature engine and the closed
// forms they check.

#include <cstdint>
#include <functional>

#include "amplab/denoise.hpp"
#include "amplab/model.hpp"

namespace amplab::oracles {

struct McEstimate {
  double mean = 0.0;
  double se = 0.0;  // standard error of the mean
};

// Plain Monte Carlo estimate of E[f(Z, beta)] with Z ~ N(0,1) independent of
// beta ~ prior.
McEstimate mc_expect_z_prior(const std::function<double(double, double)>& f,
                             const SignalPrior& prior, long samples, std::uint64_t seed);

// Draws one variate from the prior.
double sample_prior_scalar(const SignalPrior& prior, SplitMix64& gen);

// Posterior mean E[beta | beta + tau Z = s] for the Bernoulli-Gaussian prior
// by composite-Simpson integration of the posterior; no mixture algebra
// shared with bg_cond_mean.
double bg_posterior_mean_simpson(double s, double tau_sq, double xi, double v);

// E[(eta(beta + tau Z) - beta)^2] for an arbitrary scalar map, by Simpson
// over z and exact/Simpson handling of the prior mixture.
double risk_simpson(const std::function<double(double)>& eta, const SignalPrior& prior,
                    double tau_sq);

}  // namespace amplab::oracles
