#include "amplab/conc.hpp"

#include <cmath>
#include <stdexcept>

#include "amplab/rng.hpp"

namespace amplab {

TailBound TailBound::from_K(double K, double kappa, int exponent_power) {
  if (!(K > 0.0)) throw std::invalid_argument("TailBound: K must be > 0");
  if (!(kappa > 0.0)) throw std::invalid_argument("TailBound: kappa must be > 0");
  if (exponent_power != 1 && exponent_power != 2)
    throw std::invalid_argument("TailBound: exponent power must be 1 or 2");
  return TailBound{std::log(K), kappa, exponent_power};
}

double TailBound::K() const { return std::exp(log_K); }

double TailBound::log_evaluate(double n, double eps) const {
  const double ep = exponent_power == 1 ? eps : eps * eps;
  return log_K - kappa * n * ep;
}

double TailBound::evaluate(double n, double eps) const { return std::exp(log_evaluate(n, eps)); }

double hoeffding_bound(int n, std::span<const double> range_widths, double eps, bool two_sided) {
  if (n < 1) throw std::invalid_argument("hoeffding_bound: n must be >= 1");
  if (range_widths.empty()) throw std::invalid_argument("hoeffding_bound: empty ranges");
  double ssq = 0.0;
  for (double w : range_widths) {
    if (!(w >= 0.0)) throw std::invalid_argument("hoeffding_bound: negative range width");
    ssq += w * w;
  }
  if (!(ssq > 0.0)) throw std::invalid_argument("hoeffding_bound: degenerate ranges");
  const double nu = 2.0 / ssq;
  const double log_p = -nu * static_cast<double>(n) * static_cast<double>(n) * eps * eps;
  return (two_sided ? 2.0 : 1.0) * std::exp(log_p);
}

double gaussian_tail(double eps) {
  if (!(eps >= 0.0)) throw std::invalid_argument("gaussian_tail: eps must be >= 0");
  return 2.0 * std::exp(-0.5 * eps * eps);
}

double chi2_tail(int n, double eps) {
  if (n < 1) throw std::invalid_argument("chi2_tail: n must be >= 1");
  if (!(eps >= 0.0 && eps <= 1.0))
    throw std::domain_error("chi2_tail: eps must lie in [0, 1]");
  return 2.0 * std::exp(-static_cast<double>(n) * eps * eps / 8.0);
}

double pl_subgauss_bound(int N, double eps, int t, double L, double nu,
                         std::span<const double> sigmas) {
  if (N < 1) throw std::invalid_argument("pl_subgauss_bound: N must be >= 1");
  if (!(eps > 0.0 && eps <= 1.0))
    throw std::domain_error("pl_subgauss_bound: eps must lie in (0, 1]");
  if (t < 1) throw std::invalid_argument("pl_subgauss_bound: t must be >= 1");
  if (static_cast<int>(sigmas.size()) != t)
    throw std::invalid_argument("pl_subgauss_bound: need one sigma per Gaussian coordinate");
  if (!(L > 0.0) || !(nu > 0.0))
    throw std::invalid_argument("pl_subgauss_bound: L and nu must be > 0");
  double s = nu + 4.0 * nu * nu;
  for (double sig : sigmas) s += sig * sig + 4.0 * sig * sig * sig * sig;
  const double denom = 128.0 * L * L * (t + 1.0) * (t + 1.0) * s;
  return 2.0 * std::exp(-static_cast<double>(N) * eps * eps / denom);
}

double moment_bound(int k, double nu) {
  if (k < 1) throw std::invalid_argument("moment_bound: k must be >= 1");
  if (!(nu > 0.0)) throw std::invalid_argument("moment_bound: nu must be > 0");
  return std::exp(std::lgamma(k + 1.0) + k * std::log(4.0 * nu));
}

namespace {

void require_square(const TailBound& b, const char* op) {
  if (b.exponent_power != 2)
    throw std::invalid_argument(std::string(op) + ": combinators need an eps^2 bound");
}

}  // namespace

TailBound combine_sum(std::span<const TailBound> bounds) {
  if (bounds.empty()) throw std::invalid_argument("combine_sum: no inputs");
  const double M = static_cast<double>(bounds.size());
  double log_K_sum = -INFINITY;
  double kappa_min = INFINITY;
  for (const auto& b : bounds) {
    require_square(b, "combine_sum");
    // log-sum-exp accumulation of the prefactors
    const double hi = std::max(log_K_sum, b.log_K);
    log_K_sum = hi + std::log(std::exp(log_K_sum - hi) + std::exp(b.log_K - hi));
    kappa_min = std::min(kappa_min, b.kappa);
  }
  return TailBound{log_K_sum, kappa_min / (M * M), 2};
}

TailBound combine_product(const TailBound& in, double c_x, double c_y) {
  require_square(in, "combine_product");
  if (c_x == 0.0 || c_y == 0.0)
    throw std::invalid_argument("combine_product: constants must be nonzero");
  const double scale = 9.0 * std::max({1.0, c_x * c_x, c_y * c_y});
  return TailBound{in.log_K + std::log(2.0), in.kappa / scale, 2};
}

TailBound combine_sqrt(const TailBound& in, double c) {
  require_square(in, "combine_sqrt");
  if (c == 0.0) throw std::invalid_argument("combine_sqrt: c must be nonzero");
  return TailBound{in.log_K, in.kappa * c * c, 2};
}

TailBound combine_power(const TailBound& in, int k, double c) {
  require_square(in, "combine_power");
  if (k < 2) throw std::invalid_argument("combine_power: k must be >= 2");
  if (c == 0.0) throw std::invalid_argument("combine_power: c must be nonzero");
  const double a = std::abs(c);
  const double c0 = std::pow(1.0 + a, k) - std::pow(a, k);
  return TailBound{in.log_K, in.kappa / (c0 * c0), 2};
}

TailBound combine_inverse(const TailBound& in, double c) {
  require_square(in, "combine_inverse");
  if (c == 0.0) throw std::invalid_argument("combine_inverse: c must be nonzero");
  const double c2 = c * c;
  return TailBound{in.log_K + std::log(2.0), in.kappa * c2 * std::min(c2, 1.0) / 4.0, 2};
}

PL2Result verify_pl2(const PLFunction& f, int sample_budget, double radius, std::uint64_t seed) {
  if (f.arity < 1 || !f.eval) throw std::invalid_argument("verify_pl2: invalid function");
  if (sample_budget < 1 || !(radius > 0.0))
    throw std::invalid_argument("verify_pl2: invalid budget or radius");
  SplitMix64 gen(seed);
  std::vector<double> x(f.arity), y(f.arity);
  auto sample_ball = [&](std::vector<double>& v) {
    // Gaussian direction, radius by the inverse-CDF power rule.
    double norm_sq = 0.0;
    for (auto& vi : v) {
      vi = gen.next_gaussian();
      norm_sq += vi * vi;
    }
    const double r = radius * std::pow(gen.next_double_open(), 1.0 / f.arity);
    const double scale = r / std::max(std::sqrt(norm_sq), 1e-300);
    for (auto& vi : v) vi *= scale;
  };
  for (int i = 0; i < sample_budget; ++i) {
    sample_ball(x);
    sample_ball(y);
    double nx = 0.0, ny = 0.0, d = 0.0;
    for (int j = 0; j < f.arity; ++j) {
      nx += x[j] * x[j];
      ny += y[j] * y[j];
      const double dj = x[j] - y[j];
      d += dj * dj;
    }
    const double lhs = std::abs(f.eval(x) - f.eval(y));
    const double rhs = f.L * (1.0 + std::sqrt(nx) + std::sqrt(ny)) * std::sqrt(d);
    if (lhs > rhs * (1.0 + 1e-12)) return {false, x, y};
  }
  return {true, {}, {}};
}

double Theorem1Constants::K_t() const { return std::exp(log_K_t); }
double Theorem1Constants::kappa_t() const { return std::exp(log_kappa_t); }
double Theorem1Constants::K_prime_t() const { return std::exp(log_K_prime_t); }
double Theorem1Constants::kappa_prime_t() const { return std::exp(log_kappa_prime_t); }

Theorem1Constants theorem1_constants(int t, double C, double c) {
  if (t < 0) throw std::invalid_argument("theorem1_constants: t must be >= 0");
  if (!(C > 0.0) || !(c > 0.0))
    throw std::invalid_argument("theorem1_constants: C and c must be > 0");
  const double lfact = std::lgamma(t + 1.0);
  Theorem1Constants out;
  out.log_K_t = 2.0 * t * std::log(C) + 10.0 * lfact;
  out.log_kappa_t = -(2.0 * t * std::log(c) + 22.0 * lfact);
  out.log_K_prime_t = std::log(C) + 5.0 * std::log(t + 1.0) + out.log_K_t;
  out.log_kappa_prime_t = out.log_kappa_t - std::log(c) - 11.0 * std::log(t + 1.0);
  return out;
}

int max_t(double n, double eps, double c) {
  if (!(n > 0.0) || !(eps > 0.0) || !(c > 0.0))
    throw std::invalid_argument("max_t: arguments must be > 0");
  const double target = -(std::log(n) + 2.0 * std::log(eps));  // need log kappa_t >= target
  // log kappa_t = -2t log(c) - 22 lgamma(t+1) is concave in t, so a plain
  // scan over a generous range finds the last t above the target.
  int best = -1;
  for (int t = 0; t <= 1000; ++t) {
    const double log_kappa = -(2.0 * t * std::log(c) + 22.0 * std::lgamma(t + 1.0));
    if (log_kappa >= target) best = t;
  }
  return best;
}

}  // namespace amplab
