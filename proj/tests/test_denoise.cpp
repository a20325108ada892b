#include <doctest.h>

#include <cmath>

#include "amplab/denoise.hpp"
#include "amplab/errors.hpp"
#include "amplab/quadrature.hpp"
#include "amplab/rng.hpp"
#include "oracles.hpp"

using namespace amplab;

TEST_SUITE_BEGIN("denoise");

TEST_CASE("soft threshold branches") {
  CHECK(soft_threshold(2.0, 0.5) == doctest::Approx(1.5));
  CHECK(soft_threshold(0.3, 0.5) == 0.0);
  CHECK(soft_threshold(-2.0, 0.5) == doctest::Approx(-1.5));
  CHECK(soft_threshold_deriv(2.0, 0.5) == 1.0);
  CHECK(soft_threshold_deriv(0.3, 0.5) == 0.0);
  CHECK(soft_threshold_deriv(-2.0, 0.5) == 1.0);
  // kink convention: derivative 0 at |s| == theta
  CHECK(soft_threshold_deriv(0.5, 0.5) == 0.0);
  CHECK(soft_threshold_deriv(-0.5, 0.5) == 0.0);
  CHECK_THROWS_AS(soft_threshold(1.0, -0.1), std::invalid_argument);
}

TEST_CASE("tanh denoiser basics") {
  CHECK(tanh_denoiser(0.0, 1.7) == 0.0);
  CHECK(tanh_denoiser(50.0, 1.0) == doctest::Approx(1.0));
  CHECK(tanh_denoiser(1.0, 1.0) == doctest::Approx(0.7615941559557649).epsilon(1e-12));
  CHECK_THROWS_AS(tanh_denoiser(1.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(tanh_denoiser(1.0, -1.0), std::invalid_argument);
}

TEST_CASE("bernoulli-gaussian conditional mean") {
  CHECK(bg_cond_mean(0.0, 0.7, 0.3, 1.2) == 0.0);
  // xi = 1 reduces to linear shrinkage s v / (v + tau^2)
  CHECK(bg_cond_mean(2.0, 1.0, 1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK_THROWS_AS(bg_cond_mean(1.0, 1.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(bg_cond_mean(1.0, 1.0, 0.5, 0.0), std::invalid_argument);
}

TEST_CASE("bernoulli-gaussian matches the posterior-integration oracle") {
  const double xi = 0.1, v = 1.0, tau_sq = 0.5;
  CHECK(std::abs(bg_cond_mean(1.5, tau_sq, xi, v) -
                 oracles::bg_posterior_mean_simpson(1.5, tau_sq, xi, v)) < 1e-8);
  SplitMix64 gen(31);
  for (int i = 0; i < 25; ++i) {
    const double s = 6.0 * (gen.next_double() - 0.5);
    const double got = bg_cond_mean(s, tau_sq, xi, v);
    const double want = oracles::bg_posterior_mean_simpson(s, tau_sq, xi, v);
    CHECK(std::abs(got - want) < 1e-8);
  }
}

TEST_CASE("apply_denoiser examples") {
  Vector v(4);
  v << 2.0, -0.5, 0.1, -3.0;

  const DenoiseResult zero = apply_denoiser(Denoiser::zero(), v, 1.0, 2);
  CHECK(zero.values.norm() == 0.0);
  CHECK(zero.mean_deriv == 0.0);

  const DenoiseResult id = apply_denoiser(Denoiser::identity(), v, 1.0, 2);
  CHECK((id.values - v).norm() == 0.0);
  CHECK(id.mean_deriv == doctest::Approx(4.0 / 2.0));

  // alpha = 1, tau = 1 -> theta = 1
  const DenoiseResult st = apply_denoiser(Denoiser::soft_threshold(1.0), v, 1.0, 2);
  Vector want(4);
  want << 1.0, 0.0, 0.0, -2.0;
  CHECK((st.values - want).norm() == 0.0);
  CHECK(st.mean_deriv == doctest::Approx(1.0));

  Vector bad(2);
  bad << 1.0, std::nan("");
  CHECK_THROWS_AS(apply_denoiser(Denoiser::identity(), bad, 1.0, 2), NumericError);
}

TEST_CASE("general function adapter") {
  CHECK(GeneralFunctions::g(3.0, 1.0) == doctest::Approx(2.0));
  CHECK(GeneralFunctions::g_deriv(123.0, -4.0) == 1.0);

  const GeneralFunctions zero = to_general_functions(Denoiser::zero());
  CHECK(zero.f(3, 0.7, 2.5, 1.0) == doctest::Approx(-2.5));
  CHECK(zero.f(0, 123.0, 2.5, 1.0) == doctest::Approx(-2.5));

  const GeneralFunctions st = to_general_functions(Denoiser::soft_threshold(1.0));
  // t = 0 ignores the first argument entirely
  CHECK(st.f(0, 9.0, 1.5, 1.0) == doctest::Approx(-1.5));
  CHECK(st.f_deriv(0, 9.0, 1.5, 1.0) == 0.0);
  // t >= 1: eta_{t-1}(beta - a) - beta
  CHECK(st.f(1, 0.5, 3.0, 1.0) == doctest::Approx(soft_threshold(2.5, 1.0) - 3.0));
  CHECK(st.f_deriv(1, 0.5, 3.0, 1.0) == doctest::Approx(-1.0));
}

TEST_CASE("finite differences match derivatives away from kinks") {
  const std::vector<Denoiser> families = {
      Denoiser::soft_threshold(1.5), Denoiser::tanh_bayes(),
      Denoiser::bernoulli_gaussian_bayes(0.1, 1.0), Denoiser::identity(), Denoiser::zero()};
  const double tau_sq = 0.8;
  const double theta = 1.5 * std::sqrt(tau_sq);
  SplitMix64 gen(9);
  for (const Denoiser& d : families) {
    int checked = 0;
    while (checked < 1000) {
      const double s = 8.0 * (gen.next_double() - 0.5);
      if (d.family == DenoiserFamily::SoftThreshold &&
          (std::abs(std::abs(s) - theta) < 1e-4))
        continue;
      const double h = 1e-6;
      const double fd = (d.eval(s + h, tau_sq) - d.eval(s - h, tau_sq)) / (2.0 * h);
      CHECK(std::abs(fd - d.deriv(s, tau_sq)) < 1e-6);
      ++checked;
    }
  }
}

TEST_CASE("difference quotients never exceed the declared lipschitz constant") {
  const std::vector<Denoiser> families = {
      Denoiser::soft_threshold(1.5), Denoiser::tanh_bayes(),
      Denoiser::bernoulli_gaussian_bayes(0.2, 2.0), Denoiser::identity(), Denoiser::zero()};
  const double tau_sq = 0.6;
  SplitMix64 gen(13);
  for (const Denoiser& d : families) {
    const double L = d.lipschitz(tau_sq);
    for (int i = 0; i < 5000; ++i) {
      const double x = 10.0 * (gen.next_double() - 0.5);
      const double y = 10.0 * (gen.next_double() - 0.5);
      if (x == y) continue;
      const double q = std::abs(d.eval(x, tau_sq) - d.eval(y, tau_sq)) / std::abs(x - y);
      CHECK(q <= L + 1e-9);
    }
  }
}

TEST_CASE("matched conditional-mean denoisers beat the alternatives") {
  const QuadratureEngine q;
  struct Setup {
    SignalPrior prior;
    Denoiser bayes;
  };
  const std::vector<Setup> setups = {
      {SignalPrior::rademacher(), Denoiser::tanh_bayes()},
      {SignalPrior::bernoulli_gaussian(0.2, 1.0), Denoiser::bernoulli_gaussian_bayes(0.2, 1.0)}};
  const double tau_sq = 0.5;
  for (const auto& setup : setups) {
    const double bayes_risk =
        oracles::risk_simpson([&](double s) { return setup.bayes.eval(s, tau_sq); }, setup.prior,
                              tau_sq);
    // identity shrinkage
    const double m2 = setup.prior.second_moment();
    const double shrink = m2 / (m2 + tau_sq);
    const double alt0 =
        oracles::risk_simpson([&](double s) { return shrink * s; }, setup.prior, tau_sq);
    CHECK(bayes_risk <= alt0 + 1e-10);
    for (double alpha : {0.5, 1.0, 2.0}) {
      const double theta = alpha * std::sqrt(tau_sq);
      const double alt = oracles::risk_simpson(
          [&](double s) { return soft_threshold(s, theta); }, setup.prior, tau_sq);
      CHECK(bayes_risk <= alt + 1e-10);
    }
  }
}

TEST_SUITE_END();
