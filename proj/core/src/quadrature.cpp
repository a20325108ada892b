#include "amplab/quadrature.hpp"

#include <Eigen/Eigenvalues>
#include <map>
#include <mutex>

namespace amplab {

namespace {

// Golub-Welsch: nodes are the eigenvalues of the symmetric tridiagonal Jacobi
// matrix, weights are mu0 * (first eigenvector component)^2.
std::pair<std::vector<double>, std::vector<double>> golub_welsch(
    const Eigen::VectorXd& diag, const Eigen::VectorXd& subdiag, double mu0) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, subdiag, Eigen::ComputeEigenvectors);
  if (solver.info() != Eigen::Success)
    throw std::runtime_error("golub_welsch: eigendecomposition failed");
  const int n = static_cast<int>(diag.size());
  std::vector<double> nodes(n), weights(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = solver.eigenvalues()[i];
    const double v0 = solver.eigenvectors()(0, i);
    weights[i] = mu0 * v0 * v0;
  }
  return {std::move(nodes), std::move(weights)};
}

}  // namespace

GaussHermiteRule::GaussHermiteRule(int order) {
  if (order < 1) throw std::invalid_argument("GaussHermiteRule: order must be >= 1");
  // Monic probabilists' Hermite: He_{k+1} = x He_k - k He_{k-1},
  // so the Jacobi matrix has zero diagonal and subdiagonal sqrt(k).
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd subdiag(order > 1 ? order - 1 : 0);
  for (int k = 1; k < order; ++k) subdiag[k - 1] = std::sqrt(static_cast<double>(k));
  auto [n, w] = golub_welsch(diag, subdiag, 1.0);
  nodes = std::move(n);
  weights = std::move(w);
}

const GaussHermiteRule& GaussHermiteRule::cached(int order) {
  static std::map<int, GaussHermiteRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, GaussHermiteRule(order)).first;
  return it->second;
}

GaussLegendreRule::GaussLegendreRule(int order) {
  if (order < 1) throw std::invalid_argument("GaussLegendreRule: order must be >= 1");
  // Legendre on [-1,1]: a_k = 0, b_k = k / sqrt(4k^2 - 1). Total mass of the
  // uniform density is 1.
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(order);
  Eigen::VectorXd subdiag(order > 1 ? order - 1 : 0);
  for (int k = 1; k < order; ++k)
    subdiag[k - 1] = static_cast<double>(k) / std::sqrt(4.0 * k * k - 1.0);
  auto [n, w] = golub_welsch(diag, subdiag, 1.0);
  nodes = std::move(n);
  weights = std::move(w);
}

const GaussLegendreRule& GaussLegendreRule::cached(int order) {
  static std::map<int, GaussLegendreRule> cache;
  static std::mutex mutex;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(order);
  if (it == cache.end()) it = cache.emplace(order, GaussLegendreRule(order)).first;
  return it->second;
}

ScalarLaw ScalarLaw::of_prior(const SignalPrior& prior) {
  prior.validate();
  ScalarLaw law;
  switch (prior.kind) {
    case PriorKind::Rademacher:
      law.atoms = {{1.0, 0.5}, {-1.0, 0.5}};
      break;
    case PriorKind::BernoulliGaussian:
      law.atoms = {{0.0, 1.0 - prior.sparsity}};
      law.gaussians = {{prior.variance, prior.sparsity}};
      break;
    case PriorKind::Gaussian:
      law.gaussians = {{prior.variance, 1.0}};
      break;
    case PriorKind::PointMass:
      for (std::size_t i = 0; i < prior.values.size(); ++i)
        law.atoms.push_back({prior.values[i], prior.probs[i]});
      break;
  }
  return law;
}

ScalarLaw ScalarLaw::of_noise(const NoiseSpec& noise) {
  noise.validate();
  ScalarLaw law;
  if (noise.variance == 0.0) {
    law.atoms = {{0.0, 1.0}};
    return law;
  }
  switch (noise.kind) {
    case NoiseKind::Gaussian:
      law.gaussians = {{noise.variance, 1.0}};
      break;
    case NoiseKind::Uniform:
      law.uniforms = {{std::sqrt(3.0 * noise.variance), 1.0}};
      break;
    case NoiseKind::Rademacher: {
      const double s = std::sqrt(noise.variance);
      law.atoms = {{s, 0.5}, {-s, 0.5}};
      break;
    }
  }
  return law;
}

double ScalarLaw::second_moment() const {
  double m2 = 0.0;
  for (const auto& a : atoms) m2 += a.prob * a.value * a.value;
  for (const auto& g : gaussians) m2 += g.prob * g.variance;
  for (const auto& u : uniforms) m2 += u.prob * u.half_width * u.half_width / 3.0;
  return m2;
}

}  // namespace amplab
