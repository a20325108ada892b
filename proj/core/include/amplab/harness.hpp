#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "amplab/amp.hpp"
#include "amplab/model.hpp"
#include "amplab/se.hpp"

namespace amplab {

enum class LossKind { Squared, Absolute };

const char* loss_name(LossKind kind);

/// Full description of one Monte Carlo campaign. Everything downstream is a
/// pure function of this struct plus the master seed.
struct ExperimentConfig {
  SignalPrior prior;
  NoiseSpec noise;
  double delta = 0.5;
  Denoiser denoiser;
  std::vector<LossKind> losses = {LossKind::Squared, LossKind::Absolute};
  int iterations = 6;  // AMP steps per trial; losses recorded for t = 0..iterations-1
  StoppingCriterion stopping = StoppingCriterion::general(1e-10, 1e-12, 1e-12);
  int t_max = 30;
  std::vector<int> n_grid = {100, 200, 400, 800};
  int trials = 100;
  std::vector<double> epsilon_grid = {0.05};
  std::uint64_t master_seed = 1;
  int threads = 1;
  bool gaussianity = false;

  void validate() const;
};

struct TrialLossRow {
  int n = 0, N = 0, trial = 0, t = 0;
  LossKind kind = LossKind::Squared;
  double loss = 0.0;
  double se_target = 0.0;
};

struct TrialFailure {
  int n = 0, trial = 0;
  std::string message;
};

struct DeviationCell {
  int n = 0, t = 0;
  double epsilon = 0.0;
  double p_hat = 0.0, wilson_lo = 0.0, wilson_hi = 0.0;
  int trials = 0;
};

struct FitRow {
  int t = 0;
  double epsilon = 0.0;
  double slope = 0.0, intercept = 0.0, r_squared = 0.0;
  bool monotone = false;
  bool fitted = false;
  int zero_cells = 0;
};

struct GaussianityRow {
  int n = 0, trial = 0, t = 0;
  double ks_stat = 0.0, threshold = 0.0;
  bool pass = false;
};

struct WilsonInterval {
  double p_hat = 0.0, lo = 0.0, hi = 0.0;
};

// Score interval at 95%; stays informative when p_hat is 0 or 1.
WilsonInterval wilson_interval(long successes, long trials);

struct DeviationEstimate {
  double p_hat = 0.0;
  WilsonInterval interval;
};

// Fraction of losses with |loss - target| >= epsilon, with its interval.
DeviationEstimate deviation_probability(std::span<const double> losses, double target,
                                        double epsilon);

/// OLS of log p_hat against n. Cells with p_hat == 0 are replaced by their
/// Wilson upper bound and counted in zero_cells; the fit is attempted only
/// when at least 3 cells are nonzero (fitted == false otherwise, with the
/// monotonicity flag still reported).
FitRow exponential_fit(std::span<const int> n_grid, std::span<const double> p_hat,
                       std::span<const long> trials_per_cell);

// E[phi(eta_t(beta + tau_t Z), beta)]: the concentrating value of the
// empirical loss after step t.
double se_target(const SignalPrior& prior, const Denoiser& denoiser, double tau_sq_t,
                 LossKind kind, const QuadratureEngine& engine = QuadratureEngine());

struct KsResult {
  double statistic = 0.0;
  double threshold = 0.0;
  bool pass = false;
};

/// Two-sided Kolmogorov-Smirnov statistic of {h_i / tau_t} against the
/// standard normal. The pass threshold is the asymptotic 1%-level value
/// 1.63/sqrt(N) with a slack factor of 2, since the entries are only
/// approximately independent. Requires N >= 100 and tau_t > 0.
KsResult gaussianity_check(const Vector& h, double tau_t);

struct ExperimentReport {
  StateEvolutionTrace trace;
  std::vector<TrialLossRow> losses;
  std::vector<TrialFailure> failures;
  std::vector<DeviationCell> deviations;  // primary loss = losses[0] of the config
  std::vector<FitRow> fits;
  std::vector<GaussianityRow> gaussianity;
  int iterations_used = 0;
  double wall_seconds = 0.0;
};

/// Optional write-ahead sink: receives finished trial rows in deterministic
/// trial order regardless of thread count.
using TrialSink = std::function<void(std::span<const TrialLossRow>)>;

/// Runs the full campaign: one fresh instance per (n, trial) from derived
/// seeds, AMP for the configured number of steps, per-step losses against
/// quadrature targets, deviation probabilities, and decay fits. Per-trial
/// failures are recorded in the report, not rethrown.
ExperimentReport run_trials(const ExperimentConfig& config, const TrialSink& sink = nullptr);

void write_losses_header(std::ostream& os);
void write_loss_rows(std::ostream& os, std::span<const TrialLossRow> rows);
void write_deviations_csv(std::ostream& os, std::span<const DeviationCell> cells);
void write_fits_csv(std::ostream& os, std::span<const FitRow> fits);
void write_gaussianity_csv(std::ostream& os, std::span<const GaussianityRow> rows);

// Writes losses.csv, deviations.csv, fits.csv, gaussianity.csv (when
// enabled) and manifest.json into out_dir, each atomically. config_echo is
// embedded verbatim in the manifest.
void emit_report(const ExperimentReport& report, const ExperimentConfig& config,
                 const nlohmann::json& config_echo, const std::filesystem::path& out_dir);

void write_manifest(const std::filesystem::path& path, const nlohmann::json& config_echo,
                    std::uint64_t seed, bool complete, double wall_seconds,
                    std::size_t loss_rows, std::size_t failures);

}  // namespace amplab
