#pragma once

#include <cmath>
#include <stdexcept>
#include <utility>
#include <vector>

#include "amplab/model.hpp"

namespace amplab {

/// Gauss-Hermite rule in probabilists' normalization:
/// E[f(Z)] ~= sum_i w_i f(x_i) for Z ~ N(0,1), with sum_i w_i = 1.
/// Nodes and weights come from the Golub-Welsch eigendecomposition of the
/// Jacobi matrix of the monic Hermite recurrence.
struct GaussHermiteRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussHermiteRule(int order);
  static const GaussHermiteRule& cached(int order);
};

/// Gauss-Legendre rule mapped to a uniform density on [-1, 1]:
/// E[f(U)] ~= sum_i w_i f(x_i) for U ~ Uniform(-1, 1), sum_i w_i = 1.
struct GaussLegendreRule {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendreRule(int order);
  static const GaussLegendreRule& cached(int order);
};

/// Scalar mixture law used as the non-Gaussian marginal in expectations:
/// finite atoms plus zero-mean Gaussian components plus centered uniform
/// components. Every prior and noise family of the model maps onto this.
struct ScalarLaw {
  struct Atom {
    double value, prob;
  };
  struct GaussianComponent {
    double variance, prob;
  };
  struct UniformComponent {
    double half_width, prob;
  };

  std::vector<Atom> atoms;
  std::vector<GaussianComponent> gaussians;
  std::vector<UniformComponent> uniforms;

  static ScalarLaw of_prior(const SignalPrior& prior);
  static ScalarLaw of_noise(const NoiseSpec& noise);

  double second_moment() const;
};

/// Tensor-product quadrature over one or two standard normal axes and an
/// optional independent scalar marginal. A correlated pair (Z1, Z2) with
/// correlation rho is realized as Z2 = rho Z1 + sqrt(1-rho^2) Z'.
///
/// Every expectation is evaluated at the base order and again at the
/// escalated order; if the two disagree by more than escalate_tol the
/// escalated value is returned.
class QuadratureEngine {
 public:
  struct Options {
    int base_order = 61;
    int escalated_order = 121;
    double escalate_tol = 1e-8;
    bool escalate = true;
  };

  QuadratureEngine() = default;
  explicit QuadratureEngine(Options opt) : opt_(opt) {}

  const Options& options() const { return opt_; }

  template <class F>
  double expect_z(F&& f) const {
    return escalated([&](int order) { return eval_z(f, order); });
  }

  template <class F>
  double expect_x(F&& f, const ScalarLaw& law) const {
    return escalated([&](int order) { return eval_x(f, law, order); });
  }

  template <class F>
  double expect_zx(F&& f, const ScalarLaw& law) const {
    return escalated([&](int order) {
      return eval_x([&](double x) { return eval_z([&](double z) { return f(z, x); }, order); },
                    law, order);
    });
  }

  template <class F>
  double expect_zz(F&& f, double rho) const {
    const double r = checked_rho(rho);
    return escalated([&](int order) { return eval_zz(f, r, order); });
  }

  template <class F>
  double expect_zzx(F&& f, double rho, const ScalarLaw& law) const {
    const double r = checked_rho(rho);
    return escalated([&](int order) {
      return eval_x([&](double x) { return eval_zz([&](double z1, double z2) { return f(z1, z2, x); }, r, order); },
                    law, order);
    });
  }

 private:
  static double checked_rho(double rho) {
    if (std::abs(rho) > 1.0 + 1e-9)
      throw std::invalid_argument("correlation magnitude exceeds 1");
    return std::clamp(rho, -1.0, 1.0);
  }

  template <class Eval>
  double escalated(Eval&& eval) const {
    const double base = eval(opt_.base_order);
    if (!opt_.escalate) return base;
    const double high = eval(opt_.escalated_order);
    return (std::abs(base - high) > opt_.escalate_tol) ? high : base;
  }

  template <class F>
  static double eval_z(F&& f, int order) {
    const auto& rule = GaussHermiteRule::cached(order);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
      acc += rule.weights[i] * f(rule.nodes[i]);
    return acc;
  }

  template <class F>
  static double eval_zz(F&& f, double rho, int order) {
    // |rho| == 1 collapses the second axis.
    if (rho == 1.0) return eval_z([&](double z) { return f(z, z); }, order);
    if (rho == -1.0) return eval_z([&](double z) { return f(z, -z); }, order);
    const auto& rule = GaussHermiteRule::cached(order);
    const double s = std::sqrt(1.0 - rho * rho);
    double acc = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double z1 = rule.nodes[i];
      double inner = 0.0;
      for (std::size_t j = 0; j < rule.nodes.size(); ++j)
        inner += rule.weights[j] * f(z1, rho * z1 + s * rule.nodes[j]);
      acc += rule.weights[i] * inner;
    }
    return acc;
  }

  template <class F>
  static double eval_x(F&& f, const ScalarLaw& law, int order) {
    double acc = 0.0;
    for (const auto& a : law.atoms) acc += a.prob * f(a.value);
    for (const auto& g : law.gaussians) {
      const double sd = std::sqrt(g.variance);
      acc += g.prob * eval_z([&](double z) { return f(sd * z); }, order);
    }
    for (const auto& u : law.uniforms) {
      const auto& rule = GaussLegendreRule::cached(order);
      double inner = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        inner += rule.weights[i] * f(u.half_width * rule.nodes[i]);
      acc += u.prob * inner;
    }
    return acc;
  }

  Options opt_;
};

}  // namespace amplab
