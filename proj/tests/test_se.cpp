#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <sstream>

#include "amplab/errors.hpp"
#include "amplab/se.hpp"
#include "oracles.hpp"

using namespace amplab;

namespace {

StateEvolutionTrace fake_trace(std::vector<double> sigma_sq, double noise_var, double delta) {
  StateEvolutionTrace tr;
  tr.sigma_sq = std::move(sigma_sq);
  for (double s : tr.sigma_sq) tr.tau_sq.push_back(noise_var + s);
  tr.lambda_hat.assign(tr.sigma_sq.size(), 0.0);
  tr.xi_hat.assign(tr.sigma_sq.size(), 1.0);
  tr.noise_var = noise_var;
  tr.delta = delta;
  tr.T_star = tr.T();
  return tr;
}

}  // namespace

TEST_SUITE_BEGIN("se");

TEST_CASE("se_init examples") {
  CHECK(se_init(SignalPrior::rademacher(), 0.5) == doctest::Approx(2.0));
  CHECK(se_init(SignalPrior::bernoulli_gaussian(0.1, 1.0), 0.2) == doctest::Approx(0.5));
  SignalPrior degenerate;
  degenerate.kind = PriorKind::Gaussian;
  degenerate.variance = 0.0;
  CHECK_THROWS_AS(se_init(degenerate, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(se_init(SignalPrior::rademacher(), 0.0), std::invalid_argument);
}

TEST_CASE("se_step closed forms for identity and zero denoisers") {
  const SignalPrior prior = SignalPrior::bernoulli_gaussian(0.1, 1.0);
  const double delta = 0.5, noise_var = 0.01, tau_prev_sq = 0.8;

  const auto [sig_id, tau_id] =
      se_step(prior, noise_var, delta, Denoiser::identity(), tau_prev_sq);
  CHECK(sig_id == doctest::Approx(tau_prev_sq / delta).epsilon(1e-10));
  CHECK(tau_id == doctest::Approx(noise_var + tau_prev_sq / delta).epsilon(1e-10));

  const auto [sig_zero, tau_zero] =
      se_step(prior, noise_var, delta, Denoiser::zero(), tau_prev_sq);
  CHECK(sig_zero == doctest::Approx(se_init(prior, delta)).epsilon(1e-10));
  CHECK(tau_zero == doctest::Approx(noise_var + sig_zero));
}

TEST_CASE("se_step agrees with a 1e7-sample monte carlo oracle") {
  const SignalPrior prior = SignalPrior::rademacher();
  const double delta = 0.5, noise_var = 0.2, tau0_sq = 2.2;
  const Denoiser den = Denoiser::tanh_bayes();

  const auto [sigma1_sq, tau1_sq] = se_step(prior, noise_var, delta, den, tau0_sq);

  const double tau0 = std::sqrt(tau0_sq);
  const auto mc = oracles::mc_expect_z_prior(
      [&](double z, double beta) {
        const double e = den.eval(beta + tau0 * z, tau0_sq) - beta;
        return e * e;
      },
      prior, 10000000, 4242);
  CHECK(std::abs(sigma1_sq - mc.mean / delta) < 3.0 * mc.se / delta);
  CHECK(tau1_sq == doctest::Approx(noise_var + sigma1_sq));
}

TEST_CASE("run_state_evolution stopping behaviors") {
  const SignalPrior prior = SignalPrior::rademacher();
  const NoiseSpec noise{NoiseKind::Gaussian, 0.2};

  // Zero denoiser: sigma constant, the ratio criterion fires at t = 1.
  const auto trace = run_state_evolution(prior, noise, 0.5, Denoiser::zero(),
                                         StoppingCriterion::bayes(1e-12, 0.1), 10);
  CHECK(trace.T_star == 1);
  CHECK(trace.stop_reason == "stalled");
  CHECK(trace.sigma_sq[1] == doctest::Approx(trace.sigma_sq[0]).epsilon(1e-12));

  // Conditional-mean denoiser: sigma_t^2 non-increasing until the stop.
  const auto bayes = run_state_evolution(prior, noise, 0.5, Denoiser::tanh_bayes(),
                                         StoppingCriterion::bayes(1e-10, 1e-6), 12);
  for (int t = 1; t <= bayes.T(); ++t) CHECK(bayes.sigma_sq[t] <= bayes.sigma_sq[t - 1] + 1e-12);

  // eps0 larger than sigma_1^2 stops immediately with T* = 1.
  const auto fast = run_state_evolution(prior, noise, 0.5, Denoiser::tanh_bayes(),
                                        StoppingCriterion::bayes(1e3, 1e-6), 10);
  CHECK(fast.T_star == 1);
  CHECK(fast.stop_reason == "small_error");
}

TEST_CASE("check_stopping decision table") {
  const auto trace = fake_trace({1.0, 5e-4}, 0.0, 0.5);
  const auto stop1 = check_stopping(trace, nullptr, StoppingCriterion::bayes(1e-3, 0.05), 1);
  CHECK(stop1.stop);
  CHECK(stop1.reason == "small_error");

  const auto trace2 = fake_trace({1.0, 0.99}, 0.0, 0.5);
  const auto stop2 = check_stopping(trace2, nullptr, StoppingCriterion::bayes(1e-6, 0.05), 1);
  CHECK(stop2.stop);
  CHECK(stop2.reason == "stalled");

  const auto trace3 = fake_trace({1.0, 0.5}, 0.0, 0.5);
  const auto go = check_stopping(trace3, nullptr, StoppingCriterion::bayes(1e-6, 0.8), 1);
  CHECK_FALSE(go.stop);
}

TEST_CASE("covariance tables: diagonal identity and residual-side shift") {
  const SignalPrior prior = SignalPrior::bernoulli_gaussian(0.1, 1.0);
  const NoiseSpec noise{NoiseKind::Gaussian, 0.01};
  const Denoiser den = Denoiser::soft_threshold(1.5);
  const double delta = 0.5;
  const int T = 4;

  const auto trace = run_state_evolution(prior, noise, delta, den,
                                         StoppingCriterion::general(1e-12, 1e-14, 1e-14), T);
  REQUIRE(trace.T() >= T);
  const auto tables = covariance_tables(trace, prior, noise, den, T);

  for (int t = 0; t <= T; ++t) {
    CHECK(std::abs(tables.E_tilde(t, t) - trace.sigma_sq[t]) < 1e-9);
    CHECK(std::abs(tables.E_breve(t, t) - trace.tau_sq[t]) < 1e-9);
  }
  // g(a, w) = a - w makes the residual-side table the error-side table plus
  // the noise variance: quadrature route against the expansion.
  for (int t = 0; t <= T; ++t)
    for (int r = 0; r <= t; ++r)
      CHECK(std::abs(tables.E_breve(r, t) - (tables.E_tilde(r, t) + noise.variance)) < 1e-8);
  // correlations stay in [-1, 1]
  for (int t = 0; t <= T; ++t)
    for (int r = 0; r <= t; ++r) {
      const double c_tilde =
          tables.E_tilde(r, t) / std::sqrt(tables.E_tilde(r, r) * tables.E_tilde(t, t));
      const double c_breve =
          tables.E_breve(r, t) / std::sqrt(tables.E_breve(r, r) * tables.E_breve(t, t));
      CHECK(std::abs(c_tilde) <= 1.0 + 1e-12);
      CHECK(std::abs(c_breve) <= 1.0 + 1e-12);
    }
}

TEST_CASE("covariance tables under the conditional-mean denoiser collapse by column") {
  const SignalPrior prior = SignalPrior::rademacher();
  const NoiseSpec noise{NoiseKind::Gaussian, 0.2};
  const Denoiser den = Denoiser::tanh_bayes();
  const int T = 3;
  const auto trace = run_state_evolution(prior, noise, 0.5, den,
                                         StoppingCriterion::general(1e-12, 1e-14, 1e-14), T);
  const auto tables = covariance_tables(trace, prior, noise, den, T);
  for (int t = 1; t <= T; ++t)
    for (int r = 0; r < t; ++r)
      CHECK(std::abs(tables.E_tilde(r, t) - trace.sigma_sq[t]) < 1e-6);

  // Projection constants inherit the collapsed structure.
  for (int t = 1; t <= T; ++t) {
    const auto pc = projection_constants(tables, t);
    for (int r = 0; r + 1 < t; ++r) CHECK(std::abs(pc.gamma_hat[r]) < 1e-6);
    CHECK(pc.gamma_hat[t - 1] ==
          doctest::Approx(trace.sigma_sq[t] / trace.sigma_sq[t - 1]).epsilon(1e-6));
    const double want_perp =
        trace.sigma_sq[t] * (1.0 - trace.sigma_sq[t] / trace.sigma_sq[t - 1]);
    CHECK(std::abs(pc.sigma_perp_sq - want_perp) < 1e-6);
    const double want_tau_perp =
        trace.tau_sq[t] * (1.0 - trace.tau_sq[t] / trace.tau_sq[t - 1]);
    CHECK(std::abs(pc.tau_perp_sq - want_tau_perp) < 1e-6);
  }
}

TEST_CASE("projection constants: scalar case and positive definiteness") {
  const SignalPrior prior = SignalPrior::bernoulli_gaussian(0.1, 1.0);
  const NoiseSpec noise{NoiseKind::Gaussian, 0.01};
  const Denoiser den = Denoiser::soft_threshold(1.5);
  const int T = 4;
  const auto trace = run_state_evolution(prior, noise, 0.5, den,
                                         StoppingCriterion::general(1e-12, 1e-14, 1e-14), T);
  const auto tables = covariance_tables(trace, prior, noise, den, T);

  const auto pc1 = projection_constants(tables, 1);
  CHECK(pc1.gamma_hat.size() == 1);
  CHECK(pc1.gamma_hat[0] ==
        doctest::Approx(tables.E_tilde(0, 1) / tables.E_tilde(0, 0)).epsilon(1e-12));

  for (int t = 1; t <= T; ++t) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(tables.E_tilde.topLeftCorner(t, t),
                                                       Eigen::EigenvaluesOnly);
    CHECK(eig.eigenvalues().minCoeff() > 0.0);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig2(tables.E_breve.topLeftCorner(t, t),
                                                        Eigen::EigenvaluesOnly);
    CHECK(eig2.eigenvalues().minCoeff() > 0.0);
  }
}

TEST_CASE("limit scalars") {
  const SignalPrior prior = SignalPrior::bernoulli_gaussian(0.1, 1.0);
  const NoiseSpec noise{NoiseKind::Gaussian, 0.01};
  const Denoiser den = Denoiser::soft_threshold(1.5);
  const auto trace = run_state_evolution(prior, noise, 0.5, den,
                                         StoppingCriterion::general(1e-12, 1e-14, 1e-14), 3);

  for (int t = 0; t <= 3; ++t) {
    const auto [lam, xi] = limit_scalars(trace, prior, den, t);
    CHECK(xi == 1.0);
    if (t == 0) CHECK(lam == 0.0);
    CHECK(trace.xi_hat[t] == 1.0);
  }

  // identity denoiser: eta' == 1 so lambda_hat = -1/delta
  const auto id_trace = run_state_evolution(prior, noise, 0.5, Denoiser::identity(),
                                            StoppingCriterion::general(1e-12, 1e-14, 1e-14), 2);
  const auto [lam_id, xi_id] = limit_scalars(id_trace, prior, Denoiser::identity(), 1);
  CHECK(lam_id == doctest::Approx(-2.0).epsilon(1e-10));
  CHECK(xi_id == 1.0);

  // soft threshold: -(1/delta) P(|beta + tau Z| > theta), cross-checked by MC
  const double tau_sq = trace.tau_sq[0];
  const double theta = 1.5 * std::sqrt(tau_sq);
  const auto mc = oracles::mc_expect_z_prior(
      [&](double z, double beta) {
        return std::abs(beta + std::sqrt(tau_sq) * z) > theta ? 1.0 : 0.0;
      },
      prior, 4000000, 99);
  const auto [lam_st, xi_st] = limit_scalars(trace, prior, den, 1);
  CHECK(std::abs(lam_st - (-mc.mean / 0.5)) < 3.0 * mc.se / 0.5);
  CHECK(xi_st == 1.0);
}

TEST_CASE("pure process coefficients") {
  const SignalPrior prior = SignalPrior::bernoulli_gaussian(0.1, 1.0);
  const NoiseSpec noise{NoiseKind::Gaussian, 0.01};
  const Denoiser den = Denoiser::soft_threshold(1.5);
  const int T = 5;
  const auto trace = run_state_evolution(prior, noise, 0.5, den,
                                         StoppingCriterion::general(1e-12, 1e-14, 1e-14), T);
  const auto tables = covariance_tables(trace, prior, noise, den, T);
  const auto pp = pure_process_coefficients(tables.gamma_hat, tables.alpha_hat, T);

  CHECK(pp.c[0][0] == 1.0);
  CHECK(pp.d[0][0] == 1.0);
  for (int t = 1; t <= T; ++t) {
    CHECK(pp.c[t][t] == 1.0);
    CHECK(pp.d[t][t] == 1.0);
  }
  CHECK(pp.c[1][0] == doctest::Approx(tables.gamma_hat[1][0]).epsilon(1e-14));

  // variance decomposition over the innovations
  for (int k = 0; k <= T; ++k) {
    double acc_c = 0.0, acc_d = 0.0;
    for (int i = 0; i <= k; ++i) {
      acc_c += tables.sigma_perp_sq[i] * pp.c[k][i] * pp.c[k][i];
      acc_d += tables.tau_perp_sq[i] * pp.d[k][i] * pp.d[k][i];
    }
    CHECK(std::abs(acc_c - trace.sigma_sq[k]) < 1e-8);
    CHECK(std::abs(acc_d - trace.tau_sq[k]) < 1e-8);
  }
}

TEST_CASE("quadrature expectations vs monte carlo on a fixed battery") {
  struct Entry {
    SignalPrior prior;
    Denoiser denoiser;
    double tau_sq;
  };
  const std::vector<Entry> battery = {
      {SignalPrior::rademacher(), Denoiser::tanh_bayes(), 0.5},
      {SignalPrior::bernoulli_gaussian(0.1, 1.0), Denoiser::soft_threshold(1.5), 0.3},
      {SignalPrior::gaussian(1.0), Denoiser::identity(), 0.4},
  };
  const QuadratureEngine q;
  std::uint64_t seed = 1000;
  for (const auto& e : battery) {
    const double tau = std::sqrt(e.tau_sq);
    const ScalarLaw law = ScalarLaw::of_prior(e.prior);
    const auto loss = [&](double z, double beta) {
      const double err = e.denoiser.eval(beta + tau * z, e.tau_sq) - beta;
      return err * err;
    };
    const double quad = q.expect_zx(loss, law);
    const auto mc = oracles::mc_expect_z_prior(loss, e.prior, 1000000, seed++);
    CHECK(std::abs(quad - mc.mean) < 4.0 * mc.se);
  }
}

TEST_CASE("trace csv has the documented columns") {
  const SignalPrior prior = SignalPrior::rademacher();
  const NoiseSpec noise{NoiseKind::Gaussian, 0.2};
  CovarianceTables tables;
  const auto trace = run_state_evolution(prior, noise, 0.5, Denoiser::tanh_bayes(),
                                         StoppingCriterion::general(1e-12, 1e-14, 1e-14), 3,
                                         QuadratureEngine(), &tables);
  std::ostringstream os;
  write_trace_csv(os, trace, tables);
  const std::string text = os.str();
  CHECK(text.rfind("t,sigma_sq,tau_sq,sigma_perp_sq,tau_perp_sq,lambda_hat,xi_hat,stopped_reason",
                   0) == 0);
  CHECK(std::count(text.begin(), text.end(), '\n') ==
        static_cast<long>(trace.T()) + 2);  // header + rows
}

TEST_SUITE_END();
