#pragma once

#include <string>
#include <vector>

#include "amplab/denoise.hpp"
#include "amplab/model.hpp"
#include "amplab/se.hpp"

namespace amplab {

/// Algorithm state after iteration t: the estimate beta^t, the modified
/// residual z^t, and the online noise estimate ||z^t||^2 / n. The initial
/// state is beta^0 = 0, z^0 = y (the correction term vanishes at t = 0).
struct AmpState {
  Vector beta;
  Vector z;
  int t = 0;
  double tau_est_sq = 0.0;
};

AmpState amp_initial_state(const ProblemInstance& instance);

// ||z||^2 / n, the online estimate of tau_t^2.
double estimate_tau_sq(const Vector& z);

/// One iteration t -> t+1. Computes the effective observation
/// s = A^T z^t + beta^t, applies eta_t with parameter tau_sq_t, and forms
/// z^{t+1} = y - A beta^{t+1} + z^t * (1/n) sum_i eta_t'(s_i),
/// the last term being the Onsager correction.
AmpState amp_step(const AmpState& state, const ProblemInstance& instance,
                  const Denoiser& denoiser, double tau_sq_t);

enum class RunMode { FixedT, StopAtTstar };

struct AmpOptions {
  RunMode mode = RunMode::FixedT;
  int iterations = 5;
  // Low-memory mode: retain only the final state; per-iteration vectors are
  // dropped and projection diagnostics become unavailable.
  bool keep_history = true;
};

/// Per-iteration record of one run. Losses are those of beta^{t+1}:
/// mse[t] = (1/N) ||beta^{t+1} - beta0||^2, l1[t] = (1/N) ||beta^{t+1} - beta0||_1.
struct AmpHistory {
  Denoiser denoiser;
  std::vector<Vector> beta;         // beta^0..beta^T   (empty in low-memory mode)
  std::vector<Vector> z;            // z^0..z^T         (empty in low-memory mode)
  std::vector<Vector> effective;    // s^t, t = 0..T-1  (empty in low-memory mode)
  std::vector<double> mean_deriv;   // (1/n) sum eta_t'(s^t), t = 0..T-1
  std::vector<double> tau_used_sq;  // denoiser parameter at step t
  std::vector<double> tau_est_sq;   // ||z^t||^2 / n, t = 0..T
  std::vector<double> mse;
  std::vector<double> l1;
  AmpState final_state;

  int steps() const { return static_cast<int>(mse.size()); }
};

AmpHistory run_amp(const ProblemInstance& instance, const Denoiser& denoiser,
                   const StateEvolutionTrace& trace, const AmpOptions& options);

/// The run rewritten in the general-recursion coordinates:
///   h^{t+1} = beta0 - (A^T z^t + beta^t),  q^t = beta^t - beta0,
///   b^t     = w - z^t,                     m^t = -z^t,
/// with lambda_t = -(1/(delta N)) sum_i eta_{t-1}'(s^{t-1}_i) and xi_t = 1.
/// h[k] holds h^{k+1}. Requires full history and ground truth.
struct RecursionTrace {
  std::vector<Vector> h;  // h[k] = h^{k+1}, k = 0..T-1 (length N)
  std::vector<Vector> q;  // q^t, t = 0..T (length N)
  std::vector<Vector> b;  // b^t, t = 0..T (length n)
  std::vector<Vector> m;  // m^t, t = 0..T (length n)
  std::vector<double> lambda;       // t = 0..T, lambda[0] = 0
  std::vector<double> xi;           // t = 0..T, identically 1
  std::vector<double> tau_used_sq;  // copied from the run
  Denoiser denoiser;

  int T() const { return static_cast<int>(q.size()) - 1; }
};

RecursionTrace general_recursion_vectors(const AmpHistory& history,
                                         const ProblemInstance& instance);

/// Relative residuals of the algebraic identities linking the two
/// formulations; all are zero up to floating-point rounding.
///   residual_b[t]: ||b^t + lambda_t m^{t-1} - A q^t|| / ||A q^t||
///   residual_h[t]: ||h^{t+1} + xi_t q^t - A^T m^t|| / ||A^T m^t||
///   residual_q[t]: q^t against f_t(h^t, beta0) (t >= 1)
///   residual_m[t]: m^t against g_t(b^t, w)
struct IdentityReport {
  std::vector<double> residual_b;
  std::vector<double> residual_h;
  std::vector<double> residual_q;
  std::vector<double> residual_m;

  double max_residual() const;
};

IdentityReport verify_recursion_identities(const RecursionTrace& rec,
                                           const ProblemInstance& instance);

/// One labeled entry of the deviation summary: an empirical statistic of the
/// run next to its predicted concentrating value. r is -1 for quantities
/// indexed by t alone.
struct DeviationRow {
  int t = 0;
  int r = -1;
  std::string metric;
  double empirical = 0.0;
  double predicted = 0.0;

  double abs_dev() const { return std::abs(empirical - predicted); }
};

/// Projection of each q^t / m^t onto its past, plus the full deviation
/// summary against the state-evolution tables.
struct ProjectionDiagnostics {
  std::vector<Eigen::VectorXd> gamma;  // gamma[t], t >= 1; gamma[0] empty
  std::vector<Eigen::VectorXd> alpha;
  std::vector<double> q_perp_sq_n;  // (1/n)||q^t_perp||^2, t = 0..T
  std::vector<double> m_perp_sq_n;
  std::vector<double> q_ortho_rel;  // max_r |<q^r, q^t_perp>| / (||q^r|| ||q^t||), t >= 1
  std::vector<double> q_pyth_rel;   // | ||q||^2 - ||q_par||^2 - ||q_perp||^2 | / ||q||^2
  std::vector<double> m_ortho_rel;
  std::vector<double> m_pyth_rel;
  std::vector<DeviationRow> deviations;
};

// Requires tables.T() >= rec.T() and trace lambda_hat through rec.T().
// Throws SingularityError if a Gram matrix is rank-deficient.
ProjectionDiagnostics projection_diagnostics(const RecursionTrace& rec,
                                             const CovarianceTables& tables,
                                             const StateEvolutionTrace& trace);

// Run log columns: t,mse,l1_error,tau_est_sq,tau_se_sq,lambda_t,onsager_norm
void write_run_log_csv(std::ostream& os, const AmpHistory& history,
                       const StateEvolutionTrace& trace);

// Diagnostics columns: t,r,metric,empirical,predicted,abs_dev
void write_diagnostics_csv(std::ostream& os, const ProjectionDiagnostics& diag);

}  // namespace amplab
