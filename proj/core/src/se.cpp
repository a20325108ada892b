#include "amplab/se.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <ostream>
#include <stdexcept>

#include "amplab/csv.hpp"
#include "amplab/errors.hpp"

namespace amplab {

namespace {

constexpr double kConditionLimit = 1e12;

// Solves the leading t x t block C x = rhs with the condition-number guard.
Eigen::VectorXd guarded_solve(const Eigen::MatrixXd& table, int t, const char* side) {
  const Eigen::MatrixXd C = table.topLeftCorner(t, t);
  const Eigen::VectorXd rhs = table.col(t).head(t);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(C, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi / lo > kConditionLimit)
    throw SingularityError(std::string("covariance table ") + side +
                           " is numerically singular at t=" + std::to_string(t));
  return C.llt().solve(rhs);
}

double finite_or_throw(double x, const char* what) {
  if (!std::isfinite(x)) throw NumericError(std::string(what) + ": non-finite expectation");
  return x;
}

}  // namespace

StoppingCriterion StoppingCriterion::bayes(double eps0, double eps0_prime) {
  StoppingCriterion c;
  c.mode = Mode::BayesOptimal;
  c.eps0 = eps0;
  c.eps0_prime = eps0_prime;
  c.validate();
  return c;
}

StoppingCriterion StoppingCriterion::general(double eps1, double eps2, double eps3) {
  StoppingCriterion c;
  c.mode = Mode::General;
  c.eps1 = eps1;
  c.eps2 = eps2;
  c.eps3 = eps3;
  c.validate();
  return c;
}

void StoppingCriterion::validate() const {
  if (mode == Mode::BayesOptimal) {
    if (!(eps0 > 0.0)) throw std::invalid_argument("stopping eps0 must be > 0");
    if (!(eps0_prime > 0.0 && eps0_prime < 1.0))
      throw std::invalid_argument("stopping eps0_prime must lie in (0,1)");
  } else {
    if (!(eps1 > 0.0 && eps2 > 0.0 && eps3 > 0.0))
      throw std::invalid_argument("stopping thresholds must be > 0");
  }
}

double se_init(const SignalPrior& prior, double delta) {
  prior.validate();
  if (!(delta > 0.0)) throw std::invalid_argument("se_init: delta must be > 0");
  const double m2 = prior.second_moment();
  if (!(m2 > 0.0)) throw std::invalid_argument("se_init: prior second moment must be > 0");
  return m2 / delta;
}

std::pair<double, double> se_step(const SignalPrior& prior, double noise_var, double delta,
                                  const Denoiser& denoiser, double tau_prev_sq,
                                  const QuadratureEngine& engine) {
  if (!(tau_prev_sq > 0.0)) throw std::invalid_argument("se_step: tau_prev_sq must be > 0");
  const double tau_prev = std::sqrt(tau_prev_sq);
  const ScalarLaw law = ScalarLaw::of_prior(prior);
  const double sigma_sq =
      engine.expect_zx(
          [&](double z, double beta) {
            const double e = denoiser.eval(beta + tau_prev * z, tau_prev_sq) - beta;
            return e * e;
          },
          law) /
      delta;
  finite_or_throw(sigma_sq, "se_step");
  return {sigma_sq, noise_var + sigma_sq};
}

std::pair<double, double> limit_scalars(const StateEvolutionTrace& trace, const SignalPrior& prior,
                                        const Denoiser& denoiser, int t,
                                        const QuadratureEngine& engine) {
  if (t == 0) return {0.0, 1.0};
  if (t < 0 || t > trace.T()) throw std::invalid_argument("limit_scalars: t out of range");
  const double tau_prev_sq = trace.tau_sq[t - 1];
  const double tau_prev = std::sqrt(tau_prev_sq);
  const ScalarLaw law = ScalarLaw::of_prior(prior);
  const double lambda_hat =
      -engine.expect_zx(
          [&](double z, double beta) { return denoiser.deriv(beta - tau_prev * z, tau_prev_sq); },
          law) /
      trace.delta;
  return {finite_or_throw(lambda_hat, "limit_scalars"), 1.0};
}

StopDecision check_stopping(const StateEvolutionTrace& trace, const CovarianceTables* tables,
                            const StoppingCriterion& criterion, int t) {
  if (t < 1 || t > trace.T()) throw std::invalid_argument("check_stopping: need t >= 1 within trace");
  criterion.validate();
  if (criterion.mode == StoppingCriterion::Mode::BayesOptimal) {
    if (trace.sigma_sq[t] < criterion.eps0) return {true, "small_error"};
    if (trace.sigma_sq[t] / trace.sigma_sq[t - 1] > 1.0 - criterion.eps0_prime)
      return {true, "stalled"};
    return {false, {}};
  }
  if (trace.sigma_sq[t] < criterion.eps1) return {true, "small_error"};
  if (tables == nullptr || tables->T() < t)
    throw std::invalid_argument("check_stopping: general mode needs covariance tables through t");
  if (tables->sigma_perp_sq[t] < criterion.eps2) return {true, "sigma_perp_floor"};
  if (tables->tau_perp_sq[t] < criterion.eps3) return {true, "tau_perp_floor"};
  return {false, {}};
}

namespace {

/// Incremental joint construction of both tables. Column t of the error-side
/// table needs column t-1 of the residual side, and column t of the residual
/// side needs column t of the error side, so the two are extended in
/// lockstep.
class TableBuilder {
 public:
  TableBuilder(const SignalPrior& prior, const NoiseSpec& noise, const Denoiser& denoiser,
               const QuadratureEngine& engine)
      : prior_law_(ScalarLaw::of_prior(prior)),
        noise_law_(ScalarLaw::of_noise(noise)),
        fg_{denoiser},
        engine_(engine) {}

  void extend(const StateEvolutionTrace& trace, int t) {
    while (built_ < t) build_column(trace, built_ + 1);
    if (built_ < 0 && t == 0) build_column(trace, 0);
  }

  CovarianceTables take() { return std::move(tables_); }
  const CovarianceTables& tables() const { return tables_; }

 private:
  void build_column(const StateEvolutionTrace& trace, int t) {
    if (t > trace.T()) throw std::invalid_argument("covariance tables: trace too short");
    const double delta = trace.delta;
    auto& Et = tables_.E_tilde;
    auto& Eb = tables_.E_breve;
    Et.conservativeResize(t + 1, t + 1);
    Eb.conservativeResize(t + 1, t + 1);

    // Error side, column t.
    for (int r = 0; r <= t; ++r) {
      double val;
      if (t == 0) {
        val = engine_.expect_x([&](double beta) { return beta * beta; }, prior_law_) / delta;
      } else if (r == t) {
        const double tau_prev = std::sqrt(trace.tau_sq[t - 1]);
        val = engine_.expect_zx(
                  [&](double z, double beta) {
                    const double f = fg_.f(t, tau_prev * z, beta, trace.tau_sq[t - 1]);
                    return f * f;
                  },
                  prior_law_) /
              delta;
      } else if (r == 0) {
        const double tau_prev = std::sqrt(trace.tau_sq[t - 1]);
        val = engine_.expect_zx(
                  [&](double z, double beta) {
                    return -beta * fg_.f(t, tau_prev * z, beta, trace.tau_sq[t - 1]);
                  },
                  prior_law_) /
              delta;
      } else {
        const double tau_r = std::sqrt(trace.tau_sq[r - 1]);
        const double tau_t = std::sqrt(trace.tau_sq[t - 1]);
        const double rho = Eb(r - 1, t - 1) / (tau_r * tau_t);
        val = engine_.expect_zzx(
                  [&](double z1, double z2, double beta) {
                    return fg_.f(r, tau_r * z1, beta, trace.tau_sq[r - 1]) *
                           fg_.f(t, tau_t * z2, beta, trace.tau_sq[t - 1]);
                  },
                  rho, prior_law_) /
              delta;
      }
      Et(r, t) = Et(t, r) = finite_or_throw(val, "covariance tables");
    }

    // Residual side, column t.
    for (int r = 0; r <= t; ++r) {
      const double sig_r = std::sqrt(Et(r, r));
      const double sig_t = std::sqrt(Et(t, t));
      double val;
      if (r == t) {
        val = engine_.expect_zx(
            [&](double z, double w) {
              const double g = GeneralFunctions::g(sig_t * z, w);
              return g * g;
            },
            noise_law_);
      } else {
        const double rho = Et(r, t) / (sig_r * sig_t);
        val = engine_.expect_zzx(
            [&](double z1, double z2, double w) {
              return GeneralFunctions::g(sig_r * z1, w) * GeneralFunctions::g(sig_t * z2, w);
            },
            rho, noise_law_);
      }
      Eb(r, t) = Eb(t, r) = finite_or_throw(val, "covariance tables");
    }

    if (t == 0) {
      tables_.gamma_hat = {Eigen::VectorXd()};
      tables_.alpha_hat = {Eigen::VectorXd()};
      tables_.sigma_perp_sq = {Et(0, 0)};
      tables_.tau_perp_sq = {Eb(0, 0)};
    } else {
      const Eigen::VectorXd gamma = guarded_solve(Et, t, "E_tilde");
      const Eigen::VectorXd alpha = guarded_solve(Eb, t, "E_breve");
      tables_.gamma_hat.push_back(gamma);
      tables_.alpha_hat.push_back(alpha);
      tables_.sigma_perp_sq.push_back(
          std::max(0.0, Et(t, t) - gamma.dot(Et.col(t).head(t))));
      tables_.tau_perp_sq.push_back(
          std::max(0.0, Eb(t, t) - alpha.dot(Eb.col(t).head(t))));
    }
    built_ = t;
  }

  ScalarLaw prior_law_;
  ScalarLaw noise_law_;
  GeneralFunctions fg_;
  QuadratureEngine engine_;
  CovarianceTables tables_;
  int built_ = -1;
};

}  // namespace

StateEvolutionTrace run_state_evolution(const SignalPrior& prior, const NoiseSpec& noise,
                                        double delta, const Denoiser& denoiser,
                                        const StoppingCriterion& criterion, int t_max,
                                        const QuadratureEngine& engine,
                                        CovarianceTables* tables_out) {
  if (t_max < 1) throw std::invalid_argument("run_state_evolution: t_max must be >= 1");
  criterion.validate();
  noise.validate();

  StateEvolutionTrace trace;
  trace.noise_var = noise.variance;
  trace.delta = delta;
  trace.sigma_sq.push_back(se_init(prior, delta));
  trace.tau_sq.push_back(noise.variance + trace.sigma_sq[0]);
  trace.lambda_hat.push_back(0.0);
  trace.xi_hat.push_back(1.0);

  const bool need_tables =
      tables_out != nullptr || criterion.mode == StoppingCriterion::Mode::General;
  TableBuilder builder(prior, noise, denoiser, engine);
  if (need_tables) builder.extend(trace, 0);

  trace.T_star = t_max;
  trace.stop_reason = "t_max";
  for (int t = 1; t <= t_max; ++t) {
    auto [sigma_sq, tau_sq] = se_step(prior, noise.variance, delta, denoiser,
                                      trace.tau_sq[t - 1], engine);
    trace.sigma_sq.push_back(sigma_sq);
    trace.tau_sq.push_back(tau_sq);
    auto [lambda_hat, xi_hat] = limit_scalars(trace, prior, denoiser, t, engine);
    trace.lambda_hat.push_back(lambda_hat);
    trace.xi_hat.push_back(xi_hat);

    if (need_tables) builder.extend(trace, t);
    const StopDecision decision =
        check_stopping(trace, need_tables ? &builder.tables() : nullptr, criterion, t);
    if (decision.stop) {
      trace.T_star = t;
      trace.stop_reason = decision.reason;
      break;
    }
  }
  if (tables_out != nullptr) *tables_out = builder.take();
  return trace;
}

CovarianceTables covariance_tables(const StateEvolutionTrace& trace, const SignalPrior& prior,
                                   const NoiseSpec& noise, const Denoiser& denoiser, int T,
                                   const QuadratureEngine& engine) {
  if (T < 0 || T > trace.T())
    throw std::invalid_argument("covariance_tables: T must lie within the trace");
  TableBuilder builder(prior, noise, denoiser, engine);
  builder.extend(trace, 0);
  builder.extend(trace, T);
  return builder.take();
}

ProjectionConstants projection_constants(const CovarianceTables& tables, int t) {
  if (t < 1 || t > tables.T())
    throw std::invalid_argument("projection_constants: t out of range");
  ProjectionConstants out;
  out.gamma_hat = guarded_solve(tables.E_tilde, t, "E_tilde");
  out.alpha_hat = guarded_solve(tables.E_breve, t, "E_breve");
  out.sigma_perp_sq =
      std::max(0.0, tables.E_tilde(t, t) - out.gamma_hat.dot(tables.E_tilde.col(t).head(t)));
  out.tau_perp_sq =
      std::max(0.0, tables.E_breve(t, t) - out.alpha_hat.dot(tables.E_breve.col(t).head(t)));
  return out;
}

PureProcessCoefficients pure_process_coefficients(const std::vector<Eigen::VectorXd>& gamma_hat,
                                                  const std::vector<Eigen::VectorXd>& alpha_hat,
                                                  int T) {
  if (T < 0) throw std::invalid_argument("pure_process_coefficients: T must be >= 0");
  if (T >= 1 && (static_cast<int>(gamma_hat.size()) <= T || static_cast<int>(alpha_hat.size()) <= T))
    throw std::invalid_argument("pure_process_coefficients: constants missing through T");

  auto build = [T](const std::vector<Eigen::VectorXd>& hat) {
    std::vector<std::vector<double>> table(T + 1);
    table[0] = {1.0};
    for (int t = 1; t <= T; ++t) {
      table[t].assign(t + 1, 0.0);
      table[t][t] = 1.0;
      for (int i = 0; i < t; ++i) {
        double acc = 0.0;
        for (int r = i; r <= t - 1; ++r) acc += table[r][i] * hat[t][r];
        table[t][i] = acc;
      }
    }
    return table;
  };
  PureProcessCoefficients out;
  out.c = build(gamma_hat);
  out.d = build(alpha_hat);
  return out;
}

void write_trace_csv(std::ostream& os, const StateEvolutionTrace& trace,
                     const CovarianceTables& tables) {
  os << "t,sigma_sq,tau_sq,sigma_perp_sq,tau_perp_sq,lambda_hat,xi_hat,stopped_reason\n";
  for (int t = 0; t <= trace.T(); ++t) {
    const bool has_perp = t <= tables.T();
    os << t << ',' << csv::fmt(trace.sigma_sq[t]) << ',' << csv::fmt(trace.tau_sq[t]) << ','
       << (has_perp ? csv::fmt(tables.sigma_perp_sq[t]) : std::string()) << ','
       << (has_perp ? csv::fmt(tables.tau_perp_sq[t]) : std::string()) << ','
       << csv::fmt(trace.lambda_hat[t]) << ',' << csv::fmt(trace.xi_hat[t]) << ','
       << (t == trace.T() ? trace.stop_reason : std::string()) << '\n';
  }
}

}  // namespace amplab
