#include "amplab/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <nlohmann/json.hpp>
#include <ostream>
#include <stdexcept>
#include <thread>

#include "amplab/csv.hpp"
#include "amplab/errors.hpp"
#include "amplab/version.hpp"

namespace amplab {

const char* loss_name(LossKind kind) {
  return kind == LossKind::Squared ? "squared" : "absolute";
}

void ExperimentConfig::validate() const {
  prior.validate();
  noise.validate();
  denoiser.validate();
  stopping.validate();
  if (!(delta > 0.0)) throw std::invalid_argument("experiment: delta must be > 0");
  if (trials < 1) throw std::invalid_argument("experiment: trials must be >= 1");
  if (iterations < 1) throw std::invalid_argument("experiment: iterations must be >= 1");
  if (t_max < iterations)
    throw std::invalid_argument("experiment: t_max must cover the requested iterations");
  if (losses.empty()) throw std::invalid_argument("experiment: at least one loss required");
  if (n_grid.empty()) throw std::invalid_argument("experiment: empty n grid");
  for (std::size_t i = 0; i + 1 < n_grid.size(); ++i)
    if (n_grid[i] >= n_grid[i + 1])
      throw std::invalid_argument("experiment: n grid must be strictly increasing");
  for (int n : n_grid) {
    if (n < 1) throw std::invalid_argument("experiment: n must be positive");
    const double Nd = n / delta;
    if (std::abs(Nd - std::llround(Nd)) > 1e-9)
      throw std::invalid_argument("experiment: n/delta must be an integer for every grid n");
    if (gaussianity && std::llround(Nd) < 100)
      throw std::invalid_argument("experiment: gaussianity check needs N >= 100");
  }
  for (double e : epsilon_grid)
    if (!(e > 0.0 && e < 1.0))
      throw std::invalid_argument("experiment: epsilon values must lie in (0,1)");
  if (threads < 0) throw std::invalid_argument("experiment: threads must be >= 0");
}

WilsonInterval wilson_interval(long successes, long trials) {
  if (trials < 1) throw std::invalid_argument("wilson_interval: trials must be >= 1");
  if (successes < 0 || successes > trials)
    throw std::invalid_argument("wilson_interval: successes out of range");
  const double z = 1.959963984540054;  // two-sided 95%
  const double nt = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / nt;
  const double z2n = z * z / nt;
  const double denom = 1.0 + z2n;
  const double center = (p + 0.5 * z2n) / denom;
  const double half = z * std::sqrt(p * (1.0 - p) / nt + 0.25 * z2n / nt) / denom;
  return {p, std::max(0.0, center - half), std::min(1.0, center + half)};
}

DeviationEstimate deviation_probability(std::span<const double> losses, double target,
                                        double epsilon) {
  if (losses.empty()) throw std::invalid_argument("deviation_probability: no losses");
  long hits = 0;
  for (double v : losses)
    if (std::abs(v - target) >= epsilon) ++hits;
  DeviationEstimate out;
  out.interval = wilson_interval(hits, static_cast<long>(losses.size()));
  out.p_hat = out.interval.p_hat;
  return out;
}

FitRow exponential_fit(std::span<const int> n_grid, std::span<const double> p_hat,
                       std::span<const long> trials_per_cell) {
  if (n_grid.size() != p_hat.size() || n_grid.size() != trials_per_cell.size())
    throw std::invalid_argument("exponential_fit: mismatched inputs");
  FitRow fit;
  int nonzero = 0;
  for (std::size_t i = 0; i < p_hat.size(); ++i)
    if (p_hat[i] > 0.0) ++nonzero;

  fit.monotone = true;
  for (std::size_t i = 0; i + 1 < p_hat.size(); ++i)
    if (p_hat[i + 1] > p_hat[i]) fit.monotone = false;

  if (nonzero < 3) return fit;  // fit skipped; monotonicity still reported

  std::vector<double> x, y;
  for (std::size_t i = 0; i < p_hat.size(); ++i) {
    double p = p_hat[i];
    if (p == 0.0) {
      p = wilson_interval(0, trials_per_cell[i]).hi;  // substitution, flagged
      ++fit.zero_cells;
    }
    x.push_back(static_cast<double>(n_grid[i]));
    y.push_back(std::log(p));
  }
  const double m = static_cast<double>(x.size());
  double sx = 0, sy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / m, my = sy / m;
  double sxx = 0, sxy = 0, syy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss_res = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 1e-300 ? 1.0 - ss_res / syy : 1.0;
  fit.fitted = true;
  return fit;
}

double se_target(const SignalPrior& prior, const Denoiser& denoiser, double tau_sq_t,
                 LossKind kind, const QuadratureEngine& engine) {
  if (!(tau_sq_t > 0.0)) throw std::invalid_argument("se_target: tau_sq must be > 0");
  const double tau = std::sqrt(tau_sq_t);
  const ScalarLaw law = ScalarLaw::of_prior(prior);
  return engine.expect_zx(
      [&](double z, double beta) {
        const double a = denoiser.eval(beta + tau * z, tau_sq_t);
        return kind == LossKind::Squared ? (a - beta) * (a - beta) : std::abs(a - beta);
      },
      law);
}

namespace {

double std_normal_cdf(double x) { return 0.5 * std::erfc(-x / M_SQRT2); }

}  // namespace

KsResult gaussianity_check(const Vector& h, double tau_t) {
  if (!(tau_t > 0.0)) throw std::invalid_argument("gaussianity_check: tau must be > 0");
  const Index N = h.size();
  if (N < 100) throw std::invalid_argument("gaussianity_check: need N >= 100");
  std::vector<double> s(N);
  for (Index i = 0; i < N; ++i) s[i] = h[i] / tau_t;
  std::sort(s.begin(), s.end());
  double d = 0.0;
  const double nd = static_cast<double>(N);
  for (Index i = 0; i < N; ++i) {
    const double cdf = std_normal_cdf(s[i]);
    d = std::max(d, std::max((i + 1) / nd - cdf, cdf - i / nd));
  }
  KsResult out;
  out.statistic = d;
  out.threshold = 2.0 * 1.63 / std::sqrt(nd);
  out.pass = d < out.threshold;
  return out;
}

namespace {

struct TrialResult {
  std::vector<TrialLossRow> rows;
  std::vector<GaussianityRow> gauss;
  bool failed = false;
  std::string message;
};

}  // namespace

ExperimentReport run_trials(const ExperimentConfig& config, const TrialSink& sink) {
  config.validate();
  const auto t_begin = std::chrono::steady_clock::now();

  ExperimentReport report;
  report.trace = run_state_evolution(config.prior, config.noise, config.delta, config.denoiser,
                                     config.stopping, config.t_max);
  const int T = std::min(config.iterations, report.trace.T_star);
  report.iterations_used = T;

  // Loss targets by quadrature, shared across the whole grid: the state
  // evolution depends on (prior, noise, delta, denoiser) but not on n.
  std::vector<std::vector<double>> targets(config.losses.size(), std::vector<double>(T));
  for (std::size_t k = 0; k < config.losses.size(); ++k)
    for (int t = 0; t < T; ++t)
      targets[k][t] =
          se_target(config.prior, config.denoiser, report.trace.tau_sq[t], config.losses[k]);

  const int num_n = static_cast<int>(config.n_grid.size());
  const long total = static_cast<long>(num_n) * config.trials;
  std::vector<TrialResult> slots(total);

  AmpOptions amp_opt;
  amp_opt.mode = RunMode::FixedT;
  amp_opt.iterations = T;
  amp_opt.keep_history = config.gaussianity;

  auto run_one = [&](long slot) {
    const int ni = static_cast<int>(slot) / config.trials;
    const int trial = static_cast<int>(slot) % config.trials;
    const int n = config.n_grid[ni];
    const int N = static_cast<int>(std::llround(n / config.delta));
    TrialResult& out = slots[slot];
    try {
      const SeedPlan seed{config.master_seed, static_cast<std::uint64_t>(slot)};
      const ProblemInstance inst = build_instance(config.prior, config.noise, n, N, seed);
      const AmpHistory hist = run_amp(inst, config.denoiser, report.trace, amp_opt);
      for (int t = 0; t < hist.steps(); ++t) {
        for (std::size_t k = 0; k < config.losses.size(); ++k) {
          TrialLossRow row;
          row.n = n;
          row.N = N;
          row.trial = trial;
          row.t = t;
          row.kind = config.losses[k];
          row.loss = config.losses[k] == LossKind::Squared ? hist.mse[t] : hist.l1[t];
          row.se_target = targets[k][t];
          out.rows.push_back(row);
        }
        if (config.gaussianity) {
          const Vector h = inst.beta0 - hist.effective[t];
          const KsResult ks = gaussianity_check(h, std::sqrt(report.trace.tau_sq[t]));
          out.gauss.push_back({n, trial, t, ks.statistic, ks.threshold, ks.pass});
        }
      }
    } catch (const std::exception& e) {
      out.failed = true;
      out.message = e.what();
      out.rows.clear();
      out.gauss.clear();
    }
  };

  // Slot-indexed execution: results land in per-trial slots and are flushed
  // in trial order, so outputs are identical for any thread count.
  int threads = config.threads;
  if (threads == 0) threads = static_cast<int>(std::thread::hardware_concurrency());
  threads = static_cast<int>(std::max<long>(1, std::min<long>(threads, total)));

  std::mutex flush_mutex;
  long next_flush = 0;
  std::vector<bool> done(total, false);
  auto flush_ready = [&]() {
    if (!sink) return;
    std::lock_guard<std::mutex> lock(flush_mutex);
    while (next_flush < total && done[next_flush]) {
      if (!slots[next_flush].failed) sink(slots[next_flush].rows);
      ++next_flush;
    }
  };

  if (threads == 1) {
    for (long slot = 0; slot < total; ++slot) {
      run_one(slot);
      done[slot] = true;
      flush_ready();
    }
  } else {
    std::atomic<long> cursor{0};
    auto worker = [&]() {
      for (;;) {
        const long slot = cursor.fetch_add(1);
        if (slot >= total) break;
        run_one(slot);
        {
          std::lock_guard<std::mutex> lock(flush_mutex);
          done[slot] = true;
        }
        flush_ready();
      }
    };
    std::vector<std::thread> pool;
    for (int w = 0; w < threads; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  for (long slot = 0; slot < total; ++slot) {
    if (slots[slot].failed) {
      const int ni = static_cast<int>(slot) / config.trials;
      report.failures.push_back({config.n_grid[ni], static_cast<int>(slot) % config.trials,
                                 slots[slot].message});
      continue;
    }
    report.losses.insert(report.losses.end(), slots[slot].rows.begin(), slots[slot].rows.end());
    report.gaussianity.insert(report.gaussianity.end(), slots[slot].gauss.begin(),
                              slots[slot].gauss.end());
  }

  // Deviation probabilities and decay fits for the primary loss.
  const LossKind primary = config.losses[0];
  const std::size_t primary_idx = 0;
  for (int ni = 0; ni < num_n; ++ni) {
    const int n = config.n_grid[ni];
    for (int t = 0; t < T; ++t) {
      std::vector<double> vals;
      for (const auto& row : report.losses)
        if (row.n == n && row.t == t && row.kind == primary) vals.push_back(row.loss);
      if (vals.empty()) continue;
      for (double eps : config.epsilon_grid) {
        const DeviationEstimate est =
            deviation_probability(vals, targets[primary_idx][t], eps);
        report.deviations.push_back({n, t, eps, est.p_hat, est.interval.lo, est.interval.hi,
                                     static_cast<int>(vals.size())});
      }
    }
  }
  for (int t = 0; t < T; ++t) {
    for (double eps : config.epsilon_grid) {
      std::vector<int> ns;
      std::vector<double> ps;
      std::vector<long> cnt;
      for (const auto& cell : report.deviations)
        if (cell.t == t && cell.epsilon == eps) {
          ns.push_back(cell.n);
          ps.push_back(cell.p_hat);
          cnt.push_back(cell.trials);
        }
      if (ns.empty()) continue;
      FitRow fit = exponential_fit(ns, ps, cnt);
      fit.t = t;
      fit.epsilon = eps;
      report.fits.push_back(fit);
    }
  }

  report.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_begin).count();
  return report;
}

void write_losses_header(std::ostream& os) { os << "n,N,trial,t,loss_name,loss,se_target\n"; }

void write_loss_rows(std::ostream& os, std::span<const TrialLossRow> rows) {
  for (const auto& r : rows) {
    os << r.n << ',' << r.N << ',' << r.trial << ',' << r.t << ',' << loss_name(r.kind) << ','
       << csv::fmt(r.loss) << ',' << csv::fmt(r.se_target) << '\n';
  }
}

void write_deviations_csv(std::ostream& os, std::span<const DeviationCell> cells) {
  os << "n,t,epsilon,p_hat,wilson_lo,wilson_hi,trials\n";
  for (const auto& c : cells) {
    os << c.n << ',' << c.t << ',' << csv::fmt(c.epsilon) << ',' << csv::fmt(c.p_hat) << ','
       << csv::fmt(c.wilson_lo) << ',' << csv::fmt(c.wilson_hi) << ',' << c.trials << '\n';
  }
}

void write_fits_csv(std::ostream& os, std::span<const FitRow> fits) {
  os << "t,epsilon,slope,intercept,r_squared,monotone,fitted,zero_cells\n";
  for (const auto& f : fits) {
    os << f.t << ',' << csv::fmt(f.epsilon) << ',' << csv::fmt(f.slope) << ','
       << csv::fmt(f.intercept) << ',' << csv::fmt(f.r_squared) << ',' << (f.monotone ? 1 : 0)
       << ',' << (f.fitted ? 1 : 0) << ',' << f.zero_cells << '\n';
  }
}

void write_gaussianity_csv(std::ostream& os, std::span<const GaussianityRow> rows) {
  os << "n,trial,t,ks_stat,threshold,pass\n";
  for (const auto& g : rows) {
    os << g.n << ',' << g.trial << ',' << g.t << ',' << csv::fmt(g.ks_stat) << ','
       << csv::fmt(g.threshold) << ',' << (g.pass ? 1 : 0) << '\n';
  }
}

void write_manifest(const std::filesystem::path& path, const nlohmann::json& config_echo,
                    std::uint64_t seed, bool complete, double wall_seconds,
                    std::size_t loss_rows, std::size_t failures) {
  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["seed"] = seed;
  manifest["complete"] = complete;
  manifest["wall_clock_seconds"] = wall_seconds;
  manifest["loss_rows"] = loss_rows;
  manifest["failed_trials"] = failures;
  manifest["config"] = config_echo;
  csv::atomic_write(path, [&](std::ostream& os) { os << manifest.dump(2) << '\n'; });
}

void emit_report(const ExperimentReport& report, const ExperimentConfig& config,
                 const nlohmann::json& config_echo, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  csv::atomic_write(out_dir / "losses.csv", [&](std::ostream& os) {
    write_losses_header(os);
    write_loss_rows(os, report.losses);
  });
  csv::atomic_write(out_dir / "deviations.csv",
                    [&](std::ostream& os) { write_deviations_csv(os, report.deviations); });
  csv::atomic_write(out_dir / "fits.csv",
                    [&](std::ostream& os) { write_fits_csv(os, report.fits); });
  if (config.gaussianity)
    csv::atomic_write(out_dir / "gaussianity.csv",
                      [&](std::ostream& os) { write_gaussianity_csv(os, report.gaussianity); });
  write_manifest(out_dir / "manifest.json", config_echo, config.master_seed, true,
                 report.wall_seconds, report.losses.size(), report.failures.size());
}

}  // namespace amplab
