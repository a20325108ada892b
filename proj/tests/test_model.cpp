#include <doctest.h>

#include <cmath>

#include "amplab/model.hpp"

using namespace amplab;

TEST_SUITE_BEGIN("model");

TEST_CASE("sample_matrix is deterministic and rejects bad dimensions") {
  const SeedPlan seed{5, 0};
  const Matrix A = sample_matrix(2, 3, seed);
  const Matrix B = sample_matrix(2, 3, seed);
  CHECK(A.rows() == 2);
  CHECK(A.cols() == 3);
  CHECK((A - B).norm() == 0.0);
  CHECK_THROWS_AS(sample_matrix(0, 3, seed), std::invalid_argument);
  CHECK_THROWS_AS(sample_matrix(2, -1, seed), std::invalid_argument);
}

TEST_CASE("matrix entry mean at n=1000 N=2000") {
  const Matrix A = sample_matrix(1000, 2000, SeedPlan{17, 0});
  CHECK(std::abs(A.mean()) < 2.6e-4);
}

TEST_CASE("single column norm concentrates") {
  const Matrix A = sample_matrix(1000, 1, SeedPlan{99, 3});
  const double nsq = A.col(0).squaredNorm();
  CHECK(nsq > 0.7);
  CHECK(nsq < 1.3);
}

TEST_CASE("average squared column norm at n=N=1000") {
  const Matrix A = sample_matrix(1000, 1000, SeedPlan{11, 1});
  double acc = 0.0;
  for (Index j = 0; j < 1000; ++j) acc += A.col(j).squaredNorm();
  acc /= 1000.0;
  CHECK(acc > 0.95);
  CHECK(acc < 1.05);
}

TEST_CASE("rademacher signal support and determinism") {
  const SignalPrior prior = SignalPrior::rademacher();
  const Vector beta = sample_signal(prior, 4, SeedPlan{1, 0});
  for (Index i = 0; i < 4; ++i) CHECK(std::abs(beta[i]) == 1.0);
  const Vector again = sample_signal(prior, 4, SeedPlan{1, 0});
  CHECK((beta - again).norm() == 0.0);
}

TEST_CASE("bernoulli-gaussian zero fraction") {
  const SignalPrior prior = SignalPrior::bernoulli_gaussian(0.1, 1.0);
  const Index N = 100000;
  const Vector beta = sample_signal(prior, N, SeedPlan{2, 7});
  Index zeros = 0;
  for (Index i = 0; i < N; ++i)
    if (beta[i] == 0.0) ++zeros;
  const double frac = double(zeros) / double(N);
  CHECK(frac > 0.9 - 0.006);
  CHECK(frac < 0.9 + 0.006);
}

TEST_CASE("degenerate priors are rejected") {
  CHECK_THROWS_AS(SignalPrior::gaussian(0.0), std::invalid_argument);
  CHECK_THROWS_AS(SignalPrior::bernoulli_gaussian(0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SignalPrior::bernoulli_gaussian(1.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(SignalPrior::point_mass({1.0, -1.0}, {0.6, 0.6}), std::invalid_argument);
  CHECK_THROWS_AS(SignalPrior::point_mass({1.0, 2.0}, {0.5, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(SignalPrior::point_mass({0.0}, {1.0}), std::invalid_argument);
}

TEST_CASE("prior second moments") {
  CHECK(SignalPrior::rademacher().second_moment() == 1.0);
  CHECK(SignalPrior::bernoulli_gaussian(0.1, 1.0).second_moment() == doctest::Approx(0.1));
  CHECK(SignalPrior::point_mass({-2.0, 2.0}, {0.5, 0.5}).second_moment() == doctest::Approx(4.0));
}

TEST_CASE("noise: zero variance, concentration, determinism") {
  const NoiseSpec zero{NoiseKind::Gaussian, 0.0};
  CHECK(sample_noise(zero, 5, SeedPlan{1, 0}).norm() == 0.0);

  const NoiseSpec g{NoiseKind::Gaussian, 0.2};
  const Vector w = sample_noise(g, 10000, SeedPlan{3, 0});
  const double v = w.squaredNorm() / 10000.0;
  CHECK(v > 0.17);
  CHECK(v < 0.23);

  const Vector w2 = sample_noise(g, 10000, SeedPlan{3, 0});
  CHECK((w - w2).norm() == 0.0);
}

TEST_CASE("uniform and rademacher noise match requested variance") {
  for (NoiseKind kind : {NoiseKind::Uniform, NoiseKind::Rademacher}) {
    const NoiseSpec spec{kind, 0.5};
    const Vector w = sample_noise(spec, 200000, SeedPlan{8, 2});
    CHECK(std::abs(w.mean()) < 0.01);
    CHECK(w.squaredNorm() / 200000.0 == doctest::Approx(0.5).epsilon(0.02));
  }
}

TEST_CASE("build_instance invariants") {
  const SignalPrior prior = SignalPrior::rademacher();
  const NoiseSpec zero{NoiseKind::Gaussian, 0.0};
  const ProblemInstance inst = build_instance(prior, zero, 2, 2, SeedPlan{4, 0});
  CHECK((inst.y - inst.A * inst.beta0).norm() == 0.0);

  const ProblemInstance half =
      build_instance(prior, NoiseSpec{NoiseKind::Gaussian, 0.1}, 500, 1000, SeedPlan{4, 1});
  CHECK(half.delta == doctest::Approx(0.5));

  const ProblemInstance again =
      build_instance(prior, NoiseSpec{NoiseKind::Gaussian, 0.1}, 500, 1000, SeedPlan{4, 1});
  CHECK((half.y - again.y).norm() == 0.0);
}

TEST_CASE("y identity holds across random instances") {
  const SignalPrior prior = SignalPrior::bernoulli_gaussian(0.2, 1.0);
  const NoiseSpec noise{NoiseKind::Gaussian, 0.05};
  for (std::uint64_t trial = 0; trial < 100; ++trial) {
    const ProblemInstance inst = build_instance(prior, noise, 40, 80, SeedPlan{10, trial});
    const double resid = (inst.y - inst.A * inst.beta0 - inst.w).norm();
    const double scale = inst.A.norm() * inst.beta0.norm() + inst.w.norm();
    CHECK(resid <= 1e-10 * scale);
  }
}

TEST_CASE("sub-gaussian tail surrogate for every prior") {
  const std::vector<SignalPrior> priors = {
      SignalPrior::rademacher(), SignalPrior::bernoulli_gaussian(0.1, 1.0),
      SignalPrior::gaussian(2.0), SignalPrior::point_mass({-2.0, 1.0}, {1.0 / 3.0, 2.0 / 3.0})};
  const Index N = 1000000;
  for (std::size_t p = 0; p < priors.size(); ++p) {
    const Vector beta = sample_signal(priors[p], N, SeedPlan{77, p});
    const double m2 = priors[p].second_moment();
    for (double mult : {1.0, 2.0, 3.0}) {
      const double x = mult * std::sqrt(m2);
      Index hits = 0;
      for (Index i = 0; i < N; ++i)
        if (std::abs(beta[i]) > x) ++hits;
      const double empirical = double(hits) / double(N);
      const double envelope = 2.0 * std::exp(-x * x / (2.0 * 4.0 * m2));
      CHECK(empirical <= 2.0 * envelope);
    }
  }
}

TEST_SUITE_END();
