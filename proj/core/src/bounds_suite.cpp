#include "amplab/bounds_suite.hpp"

#include <cmath>
#include <functional>
#include <ostream>
#include <thread>

#include "amplab/conc.hpp"
#include "amplab/csv.hpp"
#include "amplab/rng.hpp"

namespace amplab {

namespace {

// Deterministic per-trial generator regardless of thread count.
SplitMix64 trial_generator(std::uint64_t seed, std::uint64_t suite_id, std::uint64_t n_tag,
                           std::uint64_t trial) {
  std::uint64_t h = mix64(seed ^ 0x5b4ec8d9ULL);
  h = mix64(h ^ suite_id);
  h = mix64(h ^ n_tag);
  h = mix64(h ^ trial);
  return SplitMix64(h);
}

// Runs `trials` simulations of a scalar deviation statistic and records one
// row per epsilon. bound_of(eps) already carries the kappa scaling.
void run_cells(std::vector<BoundsRow>& rows, const BoundsOptions& opt, const std::string& suite,
               std::uint64_t suite_id, double n_param,
               const std::function<double(SplitMix64&)>& deviation,
               const std::function<double(double)>& bound_of,
               const std::vector<double>& eps_grid) {
  if (eps_grid.empty()) return;
  const long trials = opt.trials;
  const int threads = std::max(1, opt.threads);
  std::vector<std::vector<long>> counts(threads, std::vector<long>(eps_grid.size(), 0));

  auto worker = [&](int w) {
    auto& mine = counts[w];
    for (long trial = w; trial < trials; trial += threads) {
      SplitMix64 gen = trial_generator(opt.seed, suite_id, static_cast<std::uint64_t>(n_param),
                                       static_cast<std::uint64_t>(trial));
      const double dev = deviation(gen);
      for (std::size_t e = 0; e < eps_grid.size(); ++e)
        if (dev >= eps_grid[e]) ++mine[e];
    }
  };
  if (threads == 1) {
    worker(0);
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker, w);
    for (auto& t : pool) t.join();
  }

  for (std::size_t e = 0; e < eps_grid.size(); ++e) {
    long hits = 0;
    for (int w = 0; w < threads; ++w) hits += counts[w][e];
    BoundsRow row;
    row.suite = suite;
    row.n = n_param;
    row.epsilon = eps_grid[e];
    row.bound = bound_of(eps_grid[e]);
    row.trials = trials;
    row.empirical = static_cast<double>(hits) / static_cast<double>(trials);
    row.slack = 3.0 * std::sqrt(std::max(row.empirical * (1.0 - row.empirical), 0.0) /
                                static_cast<double>(trials));
    row.pass = row.empirical <= row.bound + row.slack + 1e-12;
    rows.push_back(std::move(row));
  }
}

double uniform_mean_deviation(SplitMix64& gen, int m, double center, double half_width) {
  double acc = 0.0;
  for (int i = 0; i < m; ++i) acc += center + half_width * (2.0 * gen.next_double() - 1.0);
  return acc / m - center;
}

}  // namespace

std::vector<BoundsRow> run_bounds_suites(const BoundsOptions& options) {
  std::vector<BoundsRow> rows;
  const double ks = options.kappa_scale;
  const std::vector<double>& grid = options.eps_grid;

  // Bernoulli(1/2) means against the Hoeffding tail 2 exp(-2 n eps^2).
  for (int n : {20, 80}) {
    run_cells(
        rows, options, "hoeffding_bernoulli", 1, n,
        [n](SplitMix64& gen) {
          long s = 0;
          for (int i = 0; i < n; ++i) s += (gen.next() >> 63);
          return std::abs(static_cast<double>(s) / n - 0.5);
        },
        [n, ks](double eps) {
          std::vector<double> widths(n, 1.0);
          // kappa scaling folded in through the exponent
          return 2.0 * std::exp(ks * std::log(hoeffding_bound(n, widths, eps, true) / 2.0));
        },
        grid);
  }

  // Single standard normal against 2 exp(-eps^2/2).
  run_cells(
      rows, options, "gaussian", 2, 1,
      [](SplitMix64& gen) { return std::abs(gen.next_gaussian()); },
      [ks](double eps) { return 2.0 * std::exp(-ks * 0.5 * eps * eps); }, grid);

  // Normalized chi-square deviations against 2 exp(-n eps^2/8).
  for (int n : {10, 50, 200}) {
    std::vector<double> eps_ok;
    for (double e : grid)
      if (e <= 1.0) eps_ok.push_back(e);
    run_cells(
        rows, options, "chi2", 3, n,
        [n](SplitMix64& gen) {
          double s = 0.0;
          for (int i = 0; i < n; ++i) {
            const double z = gen.next_gaussian();
            s += z * z;
          }
          return std::abs(s / n - 1.0);
        },
        [n, ks](double eps) { return 2.0 * std::exp(-ks * n * eps * eps / 8.0); }, eps_ok);
  }

  // Averages of f(z, g) = z * g with the true PL(2) constant L = 1.
  for (int N : {256, 1024, 4096}) {
    const double sigma1[] = {1.0};
    run_cells(
        rows, options, "pl_subgauss", 4, N,
        [N](SplitMix64& gen) {
          double s = 0.0;
          for (int i = 0; i < N; ++i) s += gen.next_gaussian() * gen.next_gaussian();
          return std::abs(s / N);
        },
        [&, N](double eps) {
          const double raw = pl_subgauss_bound(N, eps, 1, 1.0, 1.0, sigma1) / 2.0;
          return 2.0 * std::exp(ks * std::log(raw));
        },
        grid);
  }

  // Combinator suites on means of centered uniforms with half-width 1/2:
  // the Hoeffding input bound is (K, kappa) = (2, 2) per sample.
  const double hw = 0.5;
  const TailBound input = TailBound::from_K(2.0, 1.0 / (2.0 * hw * hw), 2);
  auto scaled = [ks](TailBound b) {
    b.kappa *= ks;
    return b;
  };
  for (int m : {50, 400}) {
    const double cx = 1.0, cy = 2.0;
    const TailBound prod = scaled(combine_product(input, cx, cy));
    run_cells(
        rows, options, "combine_product", 5, m,
        [m, cx, cy, hw](SplitMix64& gen) {
          const double x = cx + uniform_mean_deviation(gen, m, cx, hw);
          const double y = cy + uniform_mean_deviation(gen, m, cy, hw);
          return std::abs(x * y - cx * cy);
        },
        [&](double eps) { return prod.evaluate(m, eps); }, grid);

    const double c_sqrt = 1.5;
    const TailBound sq = scaled(combine_sqrt(input, c_sqrt));
    run_cells(
        rows, options, "combine_sqrt", 6, m,
        [m, c_sqrt, hw](SplitMix64& gen) {
          const double x = c_sqrt * c_sqrt + uniform_mean_deviation(gen, m, c_sqrt * c_sqrt, hw);
          return std::abs(std::sqrt(std::max(x, 0.0)) - c_sqrt);
        },
        [&](double eps) { return sq.evaluate(m, eps); }, grid);

    const double c_pow = 0.8;
    const TailBound pw = scaled(combine_power(input, 2, c_pow));
    run_cells(
        rows, options, "combine_power", 7, m,
        [m, c_pow, hw](SplitMix64& gen) {
          const double x = c_pow + uniform_mean_deviation(gen, m, c_pow, hw);
          return std::abs(x * x - c_pow * c_pow);
        },
        [&](double eps) { return pw.evaluate(m, eps); }, grid);

    const double c_inv = 2.0;
    const TailBound inv = scaled(combine_inverse(input, c_inv));
    run_cells(
        rows, options, "combine_inverse", 8, m,
        [m, c_inv, hw](SplitMix64& gen) {
          const double x = c_inv + uniform_mean_deviation(gen, m, c_inv, hw);
          return std::abs(1.0 / x - 1.0 / c_inv);
        },
        [&](double eps) { return inv.evaluate(m, eps); }, grid);

    const TailBound three[] = {input, input, input};
    const TailBound sum = scaled(combine_sum(three));
    run_cells(
        rows, options, "combine_sum", 9, m,
        [m, hw](SplitMix64& gen) {
          const double c1 = 1.0, c2 = -1.0, c3 = 0.5;
          const double s = (c1 + uniform_mean_deviation(gen, m, c1, hw)) +
                           (c2 + uniform_mean_deviation(gen, m, c2, hw)) +
                           (c3 + uniform_mean_deviation(gen, m, c3, hw));
          return std::abs(s - (c1 + c2 + c3));
        },
        [&](double eps) { return sum.evaluate(m, eps); }, grid);
  }

  return rows;
}

void write_bounds_csv(std::ostream& os, const std::vector<BoundsRow>& rows) {
  os << "suite,n,epsilon,bound,empirical,slack,trials,pass\n";
  for (const auto& r : rows) {
    os << r.suite << ',' << csv::fmt(r.n) << ',' << csv::fmt(r.epsilon) << ','
       << csv::fmt(r.bound) << ',' << csv::fmt(r.empirical) << ',' << csv::fmt(r.slack) << ','
       << r.trials << ',' << (r.pass ? 1 : 0) << '\n';
  }
}

}  // namespace amplab
