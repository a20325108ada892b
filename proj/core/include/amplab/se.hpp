#pragma once

#include <Eigen/Core>
#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "amplab/denoise.hpp"
#include "amplab/quadrature.hpp"

namespace amplab {

/// Stopping rule for the scalar recursion. Bayes-optimal mode stops when the
/// predicted error is small or has stalled; general mode additionally floors
/// the perpendicular variances that keep the covariance matrices invertible.
struct StoppingCriterion {
  enum class Mode { BayesOptimal, General };

  Mode mode = Mode::General;
  double eps0 = 1e-8;        // Bayes: sigma_t^2 < eps0
  double eps0_prime = 1e-4;  // Bayes: sigma_t^2 / sigma_{t-1}^2 > 1 - eps0_prime
  double eps1 = 1e-10;       // General: sigma_t^2 < eps1
  double eps2 = 1e-12;       // General: sigma_perp_t^2 < eps2
  double eps3 = 1e-12;       // General: tau_perp_t^2 < eps3

  static StoppingCriterion bayes(double eps0, double eps0_prime);
  static StoppingCriterion general(double eps1, double eps2, double eps3);

  void validate() const;
};

struct StopDecision {
  bool stop = false;
  std::string reason;
};

/// Scalar state evolution: sigma_t^2 is the predicted per-coordinate squared
/// error scaled by 1/delta, tau_t^2 = noise_var + sigma_t^2 is the effective
/// observation noise. lambda_hat / xi_hat are the limits of the recursion
/// scalars (xi_hat == 1 for this recursion; lambda_hat[0] == 0).
struct StateEvolutionTrace {
  std::vector<double> sigma_sq;
  std::vector<double> tau_sq;
  std::vector<double> lambda_hat;
  std::vector<double> xi_hat;
  double noise_var = 0.0;
  double delta = 0.0;
  int T_star = 0;
  std::string stop_reason;

  int T() const { return static_cast<int>(sigma_sq.size()) - 1; }
};

/// Covariance tables of the limiting Gaussian families together with the
/// projection constants derived from them. E_tilde(r,t) carries the error
/// side (diagonal sigma_t^2), E_breve(r,t) the residual side (diagonal
/// tau_t^2). gamma_hat[t] / alpha_hat[t] solve the leading t x t systems;
/// the perpendicular variances are the corresponding Schur complements.
struct CovarianceTables {
  Eigen::MatrixXd E_tilde;
  Eigen::MatrixXd E_breve;
  std::vector<Eigen::VectorXd> gamma_hat;  // gamma_hat[t] has size t; [0] empty
  std::vector<Eigen::VectorXd> alpha_hat;
  std::vector<double> sigma_perp_sq;  // [0] = sigma_0^2
  std::vector<double> tau_perp_sq;    // [0] = tau_0^2

  int T() const { return static_cast<int>(sigma_perp_sq.size()) - 1; }
};

struct ProjectionConstants {
  Eigen::VectorXd gamma_hat;
  Eigen::VectorXd alpha_hat;
  double sigma_perp_sq = 0.0;
  double tau_perp_sq = 0.0;
};

/// Triangular coefficient tables expressing each iterate of the limiting
/// process as a combination of the independent innovations. c[t][i] weights
/// innovation i in iterate t (c[t][t] == 1); d likewise on the residual side.
struct PureProcessCoefficients {
  std::vector<std::vector<double>> c;
  std::vector<std::vector<double>> d;
};

// sigma_0^2 = E[beta^2] / delta. Throws on zero second moment or delta <= 0.
double se_init(const SignalPrior& prior, double delta);

// One recursion step: sigma_t^2 = (1/delta) E[(eta_{t-1}(beta + tau_{t-1} Z) - beta)^2],
// tau_t^2 = noise_var + sigma_t^2.
std::pair<double, double> se_step(const SignalPrior& prior, double noise_var, double delta,
                                  const Denoiser& denoiser, double tau_prev_sq,
                                  const QuadratureEngine& engine = QuadratureEngine());

// (lambda_hat_t, xi_hat_t) for t >= 1; t == 0 gives (0, 1).
std::pair<double, double> limit_scalars(const StateEvolutionTrace& trace, const SignalPrior& prior,
                                        const Denoiser& denoiser, int t,
                                        const QuadratureEngine& engine = QuadratureEngine());

// Evaluates the stopping rule at iteration t >= 1. General mode reads the
// perpendicular variances from `tables`, which must then cover t.
StopDecision check_stopping(const StateEvolutionTrace& trace, const CovarianceTables* tables,
                            const StoppingCriterion& criterion, int t);

/// Runs the recursion until the criterion fires or t_max is reached;
/// T_star = min(first trigger, t_max). When tables_out is non-null the
/// covariance tables are built alongside (always needed for General mode)
/// and returned through it, covering 0..T_star.
StateEvolutionTrace run_state_evolution(const SignalPrior& prior, const NoiseSpec& noise,
                                        double delta, const Denoiser& denoiser,
                                        const StoppingCriterion& criterion, int t_max,
                                        const QuadratureEngine& engine = QuadratureEngine(),
                                        CovarianceTables* tables_out = nullptr);

/// Builds both covariance tables jointly and recursively through iteration T.
/// The correlation feeding an error-side entry (r,t) is
/// E_breve(r-1,t-1)/(tau_{r-1} tau_{t-1}); the one feeding a residual-side
/// entry is E_tilde(r,t)/(sigma_r sigma_t). Requires trace.T() >= T.
CovarianceTables covariance_tables(const StateEvolutionTrace& trace, const SignalPrior& prior,
                                   const NoiseSpec& noise, const Denoiser& denoiser, int T,
                                   const QuadratureEngine& engine = QuadratureEngine());

// Solves the leading t x t systems of the tables for gamma_hat^t / alpha_hat^t
// and the perpendicular variances. Guarded: condition number above 1e12 or a
// non-positive eigenvalue raises SingularityError.
ProjectionConstants projection_constants(const CovarianceTables& tables, int t);

PureProcessCoefficients pure_process_coefficients(const std::vector<Eigen::VectorXd>& gamma_hat,
                                                  const std::vector<Eigen::VectorXd>& alpha_hat,
                                                  int T);

// Columns: t,sigma_sq,tau_sq,sigma_perp_sq,tau_perp_sq,lambda_hat,xi_hat,stopped_reason
void write_trace_csv(std::ostream& os, const StateEvolutionTrace& trace,
                     const CovarianceTables& tables);

}  // namespace amplab
