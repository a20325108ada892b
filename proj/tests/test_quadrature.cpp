#include <doctest.h>

#include <cmath>

#include "amplab/quadrature.hpp"

using namespace amplab;

TEST_SUITE_BEGIN("quadrature");

TEST_CASE("hermite rule integrates polynomials exactly") {
  const QuadratureEngine q;
  CHECK(q.expect_z([](double z) { return z * z; }) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q.expect_z([](double z) { return z; }) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(q.expect_z([](double z) { return z * z * z * z; }) ==
        doctest::Approx(3.0).epsilon(1e-12));
}

TEST_CASE("bivariate correlation is realized exactly") {
  const QuadratureEngine q;
  const double got = q.expect_zz([](double a, double b) { return a * b; }, 0.3);
  CHECK(std::abs(got - 0.3) < 1e-10);
  CHECK(q.expect_zz([](double a, double b) { return a * b; }, 1.0) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(q.expect_zz([](double a, double b) { return a * b; }, -1.0) ==
        doctest::Approx(-1.0).epsilon(1e-12));
  CHECK_THROWS_AS(q.expect_zz([](double, double) { return 0.0; }, 1.5), std::invalid_argument);
}

TEST_CASE("odd integrands vanish") {
  const QuadratureEngine q;
  CHECK(std::abs(q.expect_z([](double z) { return std::tanh(z); })) < 1e-12);
}

TEST_CASE("scalar laws reproduce second moments") {
  const auto check_law = [](const ScalarLaw& law, double expected) {
    const QuadratureEngine q;
    const double got = q.expect_x([](double x) { return x * x; }, law);
    CHECK(got == doctest::Approx(expected).epsilon(1e-10));
    CHECK(law.second_moment() == doctest::Approx(expected).epsilon(1e-12));
  };
  check_law(ScalarLaw::of_prior(SignalPrior::rademacher()), 1.0);
  check_law(ScalarLaw::of_prior(SignalPrior::bernoulli_gaussian(0.1, 1.0)), 0.1);
  check_law(ScalarLaw::of_prior(SignalPrior::gaussian(2.0)), 2.0);
  check_law(ScalarLaw::of_noise(NoiseSpec{NoiseKind::Uniform, 0.3}), 0.3);
  check_law(ScalarLaw::of_noise(NoiseSpec{NoiseKind::Rademacher, 0.4}), 0.4);
  check_law(ScalarLaw::of_noise(NoiseSpec{NoiseKind::Gaussian, 0.0}), 0.0);
}

TEST_CASE("stein identity through the engine") {
  // E[Z1 f(Z2)] = E[Z1 Z2] E[f'(Z2)] for jointly Gaussian pairs.
  const QuadratureEngine q;
  for (double rho : {-0.8, -0.2, 0.0, 0.5, 0.9}) {
    const double lhs = q.expect_zz([](double z1, double z2) { return z1 * std::tanh(z2); }, rho);
    const double rhs = rho * q.expect_z([](double z) {
      const double t = std::tanh(z);
      return 1.0 - t * t;
    });
    CHECK(std::abs(lhs - rhs) < 1e-8);
  }
}

TEST_CASE("escalation changes nothing for smooth integrands") {
  QuadratureEngine::Options opt;
  opt.escalate = false;
  const QuadratureEngine base(opt);
  const QuadratureEngine full;
  const auto f = [](double z) { return std::exp(0.3 * z) * std::cos(z); };
  CHECK(base.expect_z(f) == doctest::Approx(full.expect_z(f)).epsilon(1e-12));
}

TEST_SUITE_END();
