#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace amplab {

/// One cell of the empirical bound-validation report: the analytic tail
/// value next to the observed exceedance frequency. `suite` tags which
/// analytic bound the frequency was compared against.
struct BoundsRow {
  std::string suite;
  double n = 0.0;
  double epsilon = 0.0;
  double bound = 0.0;
  double empirical = 0.0;
  double slack = 0.0;  // 3 binomial standard errors of the frequency
  long trials = 0;
  bool pass = false;
};

struct BoundsOptions {
  long trials = 100000;
  std::vector<double> eps_grid = {0.1, 0.3, 0.5};
  std::uint64_t seed = 1;
  // Multiplies every analytic rate before comparison. 1 is the honest
  // setting; raising it is a sensitivity probe that must make suites fail.
  double kappa_scale = 1.0;
  int threads = 1;
};

/// Simulates each closed-form tail (Hoeffding on Bernoulli means, Gaussian,
/// chi-square, PL sub-Gaussian averages) and each combinator output
/// (sum/product/sqrt/power/inverse applied to uniform means) and checks
/// empirical exceedance frequencies against the analytic bounds.
std::vector<BoundsRow> run_bounds_suites(const BoundsOptions& options);

void write_bounds_csv(std::ostream& os, const std::vector<BoundsRow>& rows);

}  // namespace amplab
