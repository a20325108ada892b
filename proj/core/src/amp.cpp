#include "amplab/amp.hpp"

#include <Eigen/QR>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "amplab/csv.hpp"
#include "amplab/errors.hpp"

namespace amplab {

AmpState amp_initial_state(const ProblemInstance& instance) {
  AmpState s;
  s.beta = Vector::Zero(instance.N);
  s.z = instance.y;
  s.t = 0;
  s.tau_est_sq = estimate_tau_sq(s.z);
  return s;
}

double estimate_tau_sq(const Vector& z) {
  if (z.size() == 0) return 0.0;
  return z.squaredNorm() / static_cast<double>(z.size());
}

AmpState amp_step(const AmpState& state, const ProblemInstance& instance,
                  const Denoiser& denoiser, double tau_sq_t) {
  if (state.beta.size() != instance.N || state.z.size() != instance.n)
    throw std::invalid_argument("amp_step: state/instance dimension mismatch");
  const Vector s = instance.A.transpose() * state.z + state.beta;
  const DenoiseResult den = apply_denoiser(denoiser, s, tau_sq_t, instance.n);
  AmpState next;
  next.beta = den.values;
  next.z = instance.y - instance.A * next.beta + state.z * den.mean_deriv;
  if (!next.z.allFinite()) throw NumericError("amp_step: non-finite residual");
  next.t = state.t + 1;
  next.tau_est_sq = estimate_tau_sq(next.z);
  return next;
}

AmpHistory run_amp(const ProblemInstance& instance, const Denoiser& denoiser,
                   const StateEvolutionTrace& trace, const AmpOptions& options) {
  if (options.iterations < 1) throw std::invalid_argument("run_amp: iterations must be >= 1");
  int T = options.iterations;
  if (options.mode == RunMode::StopAtTstar) T = std::min(T, trace.T_star);
  if (denoiser.tau_source == TauSource::SeTrace && trace.T() < T - 1)
    throw std::invalid_argument("run_amp: state evolution trace too short for requested T");

  AmpHistory hist;
  hist.denoiser = denoiser;
  AmpState state = amp_initial_state(instance);
  hist.tau_est_sq.push_back(state.tau_est_sq);
  if (options.keep_history) {
    hist.beta.push_back(state.beta);
    hist.z.push_back(state.z);
  }

  for (int t = 0; t < T; ++t) {
    const double tau_sq = denoiser.tau_source == TauSource::SeTrace
                              ? trace.tau_sq[t]
                              : state.tau_est_sq;
    const Vector s = instance.A.transpose() * state.z + state.beta;
    const DenoiseResult den = apply_denoiser(denoiser, s, tau_sq, instance.n);
    AmpState next;
    next.beta = den.values;
    next.z = instance.y - instance.A * next.beta + state.z * den.mean_deriv;
    if (!next.z.allFinite()) throw NumericError("run_amp: non-finite residual");
    next.t = state.t + 1;
    next.tau_est_sq = estimate_tau_sq(next.z);

    hist.tau_used_sq.push_back(tau_sq);
    hist.mean_deriv.push_back(den.mean_deriv);
    if (options.keep_history) hist.effective.push_back(s);
    const Vector err = next.beta - instance.beta0;
    hist.mse.push_back(err.squaredNorm() / static_cast<double>(instance.N));
    hist.l1.push_back(err.lpNorm<1>() / static_cast<double>(instance.N));
    hist.tau_est_sq.push_back(next.tau_est_sq);
    if (options.keep_history) {
      hist.beta.push_back(next.beta);
      hist.z.push_back(next.z);
    }
    state = std::move(next);
  }
  hist.final_state = std::move(state);
  return hist;
}

RecursionTrace general_recursion_vectors(const AmpHistory& history,
                                         const ProblemInstance& instance) {
  if (history.beta.empty())
    throw std::invalid_argument("general_recursion_vectors: run was made in low-memory mode");
  if (instance.beta0.size() != instance.N)
    throw std::invalid_argument("general_recursion_vectors: instance lacks ground truth");
  const int T = history.steps();
  RecursionTrace rec;
  rec.denoiser = history.denoiser;
  rec.tau_used_sq = history.tau_used_sq;
  rec.q.reserve(T + 1);
  rec.b.reserve(T + 1);
  rec.m.reserve(T + 1);
  rec.h.reserve(T);
  for (int t = 0; t <= T; ++t) {
    rec.q.push_back(history.beta[t] - instance.beta0);
    rec.b.push_back(instance.w - history.z[t]);
    rec.m.push_back(-history.z[t]);
  }
  for (int t = 0; t < T; ++t) rec.h.push_back(instance.beta0 - history.effective[t]);
  rec.lambda.push_back(0.0);
  rec.xi.push_back(1.0);
  for (int t = 1; t <= T; ++t) {
    rec.lambda.push_back(-history.mean_deriv[t - 1]);
    rec.xi.push_back(1.0);
  }
  return rec;
}

double IdentityReport::max_residual() const {
  double mx = 0.0;
  for (double v : residual_b) mx = std::max(mx, v);
  for (double v : residual_h) mx = std::max(mx, v);
  for (double v : residual_q) mx = std::max(mx, v);
  for (double v : residual_m) mx = std::max(mx, v);
  return mx;
}

IdentityReport verify_recursion_identities(const RecursionTrace& rec,
                                           const ProblemInstance& instance) {
  const int T = rec.T();
  IdentityReport rep;
  const double tiny = 1e-300;
  for (int t = 0; t <= T; ++t) {
    const Vector rhs = instance.A * rec.q[t];
    Vector lhs = rec.b[t];
    if (t >= 1) lhs += rec.lambda[t] * rec.m[t - 1];
    rep.residual_b.push_back((lhs - rhs).norm() / std::max(rhs.norm(), tiny));
  }
  for (int t = 0; t + 1 <= T; ++t) {
    const Vector rhs = instance.A.transpose() * rec.m[t];
    const Vector lhs = rec.h[t] + rec.xi[t] * rec.q[t];
    rep.residual_h.push_back((lhs - rhs).norm() / std::max(rhs.norm(), tiny));
  }
  const GeneralFunctions fg{rec.denoiser};
  for (int t = 0; t <= T; ++t) {
    Vector fval(instance.N);
    if (t == 0) {
      fval = -instance.beta0;
    } else {
      for (Index i = 0; i < instance.N; ++i)
        fval[i] = fg.f(t, rec.h[t - 1][i], instance.beta0[i], rec.tau_used_sq[t - 1]);
    }
    rep.residual_q.push_back((rec.q[t] - fval).norm() / std::max(rec.q[t].norm(), tiny));
  }
  for (int t = 0; t <= T; ++t) {
    Vector gval(instance.n);
    for (Index i = 0; i < instance.n; ++i)
      gval[i] = GeneralFunctions::g(rec.b[t][i], instance.w[i]);
    rep.residual_m.push_back((rec.m[t] - gval).norm() / std::max(rec.m[t].norm(), tiny));
  }
  return rep;
}

namespace {

struct ProjectionSplit {
  Eigen::VectorXd coeffs;
  Vector perp;
  double ortho_rel = 0.0;
  double pyth_rel = 0.0;
};

// Least-squares projection of v onto the columns of past (n x t), via
// column-pivoted QR with a relative rank tolerance of 1e-10.
ProjectionSplit project_onto_past(const std::vector<Vector>& past, const Vector& v, int t,
                                  const char* what) {
  Eigen::MatrixXd P(v.size(), t);
  for (int r = 0; r < t; ++r) P.col(r) = past[r];
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(P);
  qr.setThreshold(1e-10);
  if (qr.rank() < t)
    throw SingularityError(std::string("projection_diagnostics: rank-deficient Gram matrix for ") +
                           what + " at t=" + std::to_string(t));
  ProjectionSplit out;
  out.coeffs = qr.solve(v);
  const Vector par = P * out.coeffs;
  out.perp = v - par;
  const double vnorm = v.norm();
  double ortho = 0.0;
  for (int r = 0; r < t; ++r)
    ortho = std::max(ortho, std::abs(past[r].dot(out.perp)) /
                                std::max(past[r].norm() * vnorm, 1e-300));
  out.ortho_rel = ortho;
  out.pyth_rel = std::abs(v.squaredNorm() - par.squaredNorm() - out.perp.squaredNorm()) /
                 std::max(v.squaredNorm(), 1e-300);
  return out;
}

}  // namespace

ProjectionDiagnostics projection_diagnostics(const RecursionTrace& rec,
                                             const CovarianceTables& tables,
                                             const StateEvolutionTrace& trace) {
  const int T = rec.T();
  if (tables.T() < T)
    throw std::invalid_argument("projection_diagnostics: covariance tables too short");
  if (trace.T() < T)
    throw std::invalid_argument("projection_diagnostics: state evolution trace too short");
  const double n = static_cast<double>(rec.b[0].size());
  const double N = static_cast<double>(rec.q[0].size());

  ProjectionDiagnostics diag;
  diag.gamma.emplace_back();
  diag.alpha.emplace_back();
  diag.q_perp_sq_n.push_back(rec.q[0].squaredNorm() / n);
  diag.m_perp_sq_n.push_back(rec.m[0].squaredNorm() / n);
  auto& rows = diag.deviations;
  rows.push_back({0, -1, "q_perp_sq_n", diag.q_perp_sq_n[0], tables.sigma_perp_sq[0]});
  rows.push_back({0, -1, "m_perp_sq_n", diag.m_perp_sq_n[0], tables.tau_perp_sq[0]});

  for (int t = 1; t <= T; ++t) {
    ProjectionSplit qs = project_onto_past(rec.q, rec.q[t], t, "Q");
    ProjectionSplit ms = project_onto_past(rec.m, rec.m[t], t, "M");
    diag.q_perp_sq_n.push_back(qs.perp.squaredNorm() / n);
    diag.m_perp_sq_n.push_back(ms.perp.squaredNorm() / n);
    diag.q_ortho_rel.push_back(qs.ortho_rel);
    diag.q_pyth_rel.push_back(qs.pyth_rel);
    diag.m_ortho_rel.push_back(ms.ortho_rel);
    diag.m_pyth_rel.push_back(ms.pyth_rel);

    for (int r = 0; r < t; ++r) {
      rows.push_back({t, r, "gamma", qs.coeffs[r], tables.gamma_hat[t][r]});
      rows.push_back({t, r, "alpha", ms.coeffs[r], tables.alpha_hat[t][r]});
    }
    rows.push_back({t, -1, "q_perp_sq_n", diag.q_perp_sq_n[t], tables.sigma_perp_sq[t]});
    rows.push_back({t, -1, "m_perp_sq_n", diag.m_perp_sq_n[t], tables.tau_perp_sq[t]});
    rows.push_back({t, -1, "lambda", rec.lambda[t], trace.lambda_hat[t]});
    rows.push_back({t, -1, "xi", rec.xi[t], 1.0});
    diag.gamma.push_back(std::move(qs.coeffs));
    diag.alpha.push_back(std::move(ms.coeffs));
  }

  for (int t = 0; t <= T; ++t)
    for (int r = 0; r <= t; ++r) {
      rows.push_back({t, r, "b_gram_n", rec.b[r].dot(rec.b[t]) / n, tables.E_tilde(r, t)});
      rows.push_back({t, r, "m_gram_n", rec.m[r].dot(rec.m[t]) / n, tables.E_breve(r, t)});
      rows.push_back({t, r, "q_gram_n", rec.q[r].dot(rec.q[t]) / n, tables.E_tilde(r, t)});
      rows.push_back({t, r, "bm_cross_n", rec.b[r].dot(rec.m[t]) / n,
                      trace.xi_hat[t] * tables.E_tilde(r, t)});
    }
  for (int t = 0; t + 1 <= T; ++t)
    for (int r = 0; r <= t; ++r) {
      rows.push_back({t, r, "h_gram_N", rec.h[r].dot(rec.h[t]) / N, tables.E_breve(r, t)});
      rows.push_back({t, r, "hq_cross_n", rec.h[t].dot(rec.q[r + 1]) / n,
                      trace.lambda_hat[r + 1] * tables.E_breve(r, t)});
    }
  return diag;
}

void write_run_log_csv(std::ostream& os, const AmpHistory& history,
                       const StateEvolutionTrace& trace) {
  os << "t,mse,l1_error,tau_est_sq,tau_se_sq,lambda_t,onsager_norm\n";
  for (int t = 0; t < history.steps(); ++t) {
    const double lambda_t = t == 0 ? 0.0 : -history.mean_deriv[t - 1];
    double onsager = 0.0;
    if (t >= 1 && !history.z.empty()) onsager = history.mean_deriv[t - 1] * history.z[t - 1].norm();
    os << t << ',' << csv::fmt(history.mse[t]) << ',' << csv::fmt(history.l1[t]) << ','
       << csv::fmt(history.tau_est_sq[t]) << ','
       << (t <= trace.T() ? csv::fmt(trace.tau_sq[t]) : std::string()) << ','
       << csv::fmt(lambda_t) << ',' << csv::fmt(onsager) << '\n';
  }
}

void write_diagnostics_csv(std::ostream& os, const ProjectionDiagnostics& diag) {
  os << "t,r,metric,empirical,predicted,abs_dev\n";
  for (const auto& row : diag.deviations) {
    os << row.t << ',' << row.r << ',' << row.metric << ',' << csv::fmt(row.empirical) << ','
       << csv::fmt(row.predicted) << ',' << csv::fmt(row.abs_dev()) << '\n';
  }
}

}  // namespace amplab
