#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

namespace amplab {

/// Tail bound of shape K * exp(-kappa * n * eps^p), p in {1, 2}. The
/// prefactor is stored in log space so bounds with huge K (factorial growth
/// in the iteration index) stay representable; evaluate() may legitimately
/// exceed 1, which is vacuous but correct.
struct TailBound {
  double log_K = 0.0;
  double kappa = 0.0;
  int exponent_power = 2;

  static TailBound from_K(double K, double kappa, int exponent_power = 2);

  double K() const;
  double log_evaluate(double n, double eps) const;
  double evaluate(double n, double eps) const;
};

// exp(-nu n^2 eps^2) with nu = 2 / sum (b_i - a_i)^2; doubled when two-sided.
// `range_widths` holds b_i - a_i for each variable.
double hoeffding_bound(int n, std::span<const double> range_widths, double eps, bool two_sided);

// 2 exp(-eps^2 / 2): two-sided standard normal tail envelope.
double gaussian_tail(double eps);

// 2 exp(-n eps^2 / 8) for the normalized chi-square deviation; valid on
// 0 <= eps <= 1 only, out-of-range eps is a domain error.
double chi2_tail(int n, double eps);

// 2 exp{-N eps^2 / [128 L^2 (t+1)^2 (nu + 4 nu^2 + sum_m (sigma_m^2 + 4 sigma_m^4))]}
// for averages of a PL(2) function of t correlated Gaussians and one
// sub-Gaussian coordinate with variance factor nu. Requires 0 < eps <= 1,
// t >= 1, sigmas.size() == t.
double pl_subgauss_bound(int N, double eps, int t, double L, double nu,
                         std::span<const double> sigmas);

// (k!) (4 nu)^k: even-moment envelope of a sub-Gaussian with variance
// factor nu. Test utility.
double moment_bound(int k, double nu);

// Bound-parameter combinators. Inputs must have exponent_power == 2.
TailBound combine_sum(std::span<const TailBound> bounds);
TailBound combine_product(const TailBound& in, double c_x, double c_y);
TailBound combine_sqrt(const TailBound& in, double c);
TailBound combine_power(const TailBound& in, int k, double c);
TailBound combine_inverse(const TailBound& in, double c);

/// A candidate pseudo-Lipschitz (order 2) function with its declared
/// constant: |f(x) - f(y)| <= L (1 + |x| + |y|) |x - y| on sampled pairs.
struct PLFunction {
  int arity = 1;
  std::function<double(std::span<const double>)> eval;
  double L = 1.0;
};

struct PL2Result {
  bool pass = true;
  std::vector<double> x, y;  // first violating pair when !pass
};

// Samples point pairs uniformly in the centered ball of the given radius and
// checks the PL(2) inequality with the declared constant.
PL2Result verify_pl2(const PLFunction& f, int sample_budget, double radius,
                     std::uint64_t seed = 1);

/// Iteration-indexed constants of the deviation bound, kept in log space:
/// K_t = C^{2t} (t!)^10, kappa_t = 1 / (c^{2t} (t!)^22),
/// K'_t = C (t+1)^5 K_t, kappa'_t = kappa_t / (c (t+1)^11).
struct Theorem1Constants {
  double log_K_t = 0.0;
  double log_kappa_t = 0.0;
  double log_K_prime_t = 0.0;
  double log_kappa_prime_t = 0.0;

  double K_t() const;
  double kappa_t() const;
  double K_prime_t() const;
  double kappa_prime_t() const;
};

Theorem1Constants theorem1_constants(int t, double C, double c);

// Largest t >= 0 with kappa_t * n * eps^2 >= 1, or -1 if none. Non-decreasing
// in n for fixed (eps, c).
int max_t(double n, double eps, double c);

}  // namespace amplab
