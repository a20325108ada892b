// amplab: state evolution tables, single AMP runs with recursion diagnostics,
// Monte Carlo deviation experiments, and concentration-bound validation.
//
// Exit codes: 0 success, 1 result-assertion failure, 2 config/usage error,
// 3 I/O error.

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <nlohmann/json.hpp>
#include <string>

#include "amplab/amp.hpp"
#include "amplab/bounds_suite.hpp"
#include "amplab/config.hpp"
#include "amplab/csv.hpp"
#include "amplab/errors.hpp"
#include "amplab/harness.hpp"
#include "amplab/se.hpp"
#include "amplab/version.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAssertion = 1;
constexpr int kExitConfig = 2;
constexpr int kExitIo = 3;

struct GlobalFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = -1;  // -1: not given on the command line
  bool dry_run = false;
  bool verbose = false;
};

// Precedence: --threads flag > AMP_LAB_THREADS > config value.
int resolve_threads(const GlobalFlags& flags, int config_threads) {
  if (flags.threads >= 0) return flags.threads;
  if (const char* env = std::getenv("AMP_LAB_THREADS")) {
    try {
      return std::max(0, std::stoi(env));
    } catch (...) {
      throw amplab::ConfigError("AMP_LAB_THREADS is not an integer");
    }
  }
  return config_threads;
}

amplab::FileConfig load_config(const GlobalFlags& flags) {
  if (flags.config_path.empty()) throw amplab::ConfigError("--config is required");
  amplab::FileConfig config = amplab::parse_config_file(flags.config_path);
  if (flags.seed_set) config.seed = flags.seed;
  config.threads = resolve_threads(flags, config.threads);
  return config;
}

int cmd_se(const GlobalFlags& flags) {
  const amplab::FileConfig config = load_config(flags);
  amplab::CovarianceTables tables;
  const amplab::StateEvolutionTrace trace =
      amplab::run_state_evolution(config.prior, config.noise, config.delta, config.denoiser,
                                  config.stopping, config.t_max, amplab::QuadratureEngine(),
                                  &tables);
  std::filesystem::create_directories(flags.out_dir);
  const auto path = std::filesystem::path(flags.out_dir) / "se_trace.csv";
  amplab::csv::atomic_write(path, [&](std::ostream& os) {
    amplab::write_trace_csv(os, trace, tables);
  });
  if (flags.verbose)
    std::cerr << "se: T_star=" << trace.T_star << " reason=" << trace.stop_reason << " -> "
              << path.string() << "\n";
  return kExitOk;
}

int cmd_run(const GlobalFlags& flags) {
  const amplab::FileConfig config = load_config(flags);
  const int n = config.n;
  const int N = static_cast<int>(std::llround(n / config.delta));

  amplab::CovarianceTables tables;
  const amplab::StateEvolutionTrace trace =
      amplab::run_state_evolution(config.prior, config.noise, config.delta, config.denoiser,
                                  config.stopping, config.t_max, amplab::QuadratureEngine(),
                                  &tables);
  const amplab::SeedPlan seed{config.seed, 0};
  const amplab::ProblemInstance inst =
      amplab::build_instance(config.prior, config.noise, n, N, seed);

  amplab::AmpOptions opt;
  opt.mode = amplab::RunMode::StopAtTstar;
  opt.iterations = config.iterations;
  const amplab::AmpHistory hist = amplab::run_amp(inst, config.denoiser, trace, opt);
  const amplab::RecursionTrace rec = amplab::general_recursion_vectors(hist, inst);
  const amplab::IdentityReport identities = amplab::verify_recursion_identities(rec, inst);
  const amplab::ProjectionDiagnostics diag = amplab::projection_diagnostics(rec, tables, trace);

  std::filesystem::create_directories(flags.out_dir);
  const auto out = std::filesystem::path(flags.out_dir);
  amplab::csv::atomic_write(out / "run_log.csv", [&](std::ostream& os) {
    amplab::write_run_log_csv(os, hist, trace);
  });
  amplab::csv::atomic_write(out / "run_diagnostics.csv", [&](std::ostream& os) {
    amplab::write_diagnostics_csv(os, diag);
  });

  const double residual = identities.max_residual();
  if (flags.verbose)
    std::cerr << "run: T=" << hist.steps() << " max identity residual=" << residual << "\n";
  if (residual > 1e-8) {
    std::cerr << "run: recursion identity residual " << residual << " exceeds 1e-8\n";
    return kExitAssertion;
  }
  return kExitOk;
}

int cmd_experiment(const GlobalFlags& flags) {
  const amplab::FileConfig config = load_config(flags);
  const amplab::ExperimentConfig exp = amplab::to_experiment_config(config);
  exp.validate();

  if (flags.dry_run) {
    const long trial_count = static_cast<long>(exp.n_grid.size()) * exp.trials;
    double matvec_flops = 0.0;
    for (int n : exp.n_grid)
      matvec_flops += 2.0 * exp.iterations * 2.0 * n * (n / exp.delta) * exp.trials;
    std::cout << "trials: " << trial_count << "\n";
    std::cout << "n grid:";
    for (int n : exp.n_grid) std::cout << ' ' << n;
    std::cout << "\niterations per trial: " << exp.iterations << "\n";
    std::cout << "estimated matvec flops: " << matvec_flops << "\n";
    return kExitOk;
  }

  std::filesystem::create_directories(flags.out_dir);
  const auto out = std::filesystem::path(flags.out_dir);
  const nlohmann::json echo = amplab::to_json(config);

  // Write-ahead: manifest flagged incomplete, losses streamed as trials
  // finish. Completion replaces both atomically.
  amplab::write_manifest(out / "manifest.json", echo, exp.master_seed, false, 0.0, 0, 0);
  const auto partial = out / "losses.csv.partial";
  std::ofstream stream(partial, std::ios::binary | std::ios::trunc);
  if (!stream) throw amplab::IoError("cannot open " + partial.string());
  amplab::write_losses_header(stream);

  const amplab::ExperimentReport report =
      amplab::run_trials(exp, [&](std::span<const amplab::TrialLossRow> rows) {
        amplab::write_loss_rows(stream, rows);
        stream.flush();
      });
  stream.close();

  amplab::emit_report(report, exp, echo, out);
  std::error_code ec;
  std::filesystem::remove(partial, ec);

  if (flags.verbose)
    std::cerr << "experiment: " << report.losses.size() << " loss rows, "
              << report.failures.size() << " failed trials, " << report.wall_seconds << " s\n";
  return kExitOk;
}

int cmd_bounds(const GlobalFlags& flags, double kappa_scale) {
  const amplab::FileConfig config = load_config(flags);
  amplab::BoundsOptions opt;
  opt.trials = config.trials;
  opt.eps_grid = config.epsilon_grid;
  opt.seed = config.seed;
  opt.kappa_scale = kappa_scale;
  opt.threads = std::max(1, config.threads);

  const std::vector<amplab::BoundsRow> rows = amplab::run_bounds_suites(opt);
  std::filesystem::create_directories(flags.out_dir);
  amplab::csv::atomic_write(std::filesystem::path(flags.out_dir) / "bounds.csv",
                            [&](std::ostream& os) { amplab::write_bounds_csv(os, rows); });
  long failed = 0;
  for (const auto& r : rows)
    if (!r.pass) ++failed;
  if (flags.verbose)
    std::cerr << "bounds: " << rows.size() << " cells, " << failed << " failures\n";
  if (failed > 0) {
    std::cerr << "bounds: " << failed << " cells exceed their analytic bound\n";
    return kExitAssertion;
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"AMP + state evolution laboratory"};
  app.set_version_flag("--version", amplab::kVersion);
  app.require_subcommand(1);

  GlobalFlags flags;
  app.add_option("--config", flags.config_path, "Path to the JSON config file");
  app.add_option("--out", flags.out_dir, "Output directory");
  auto* seed_opt = app.add_option("--seed", flags.seed, "Master seed override");
  app.add_option("--threads", flags.threads, "Worker thread count (0 = hardware)");
  app.add_flag("--dry-run", flags.dry_run, "Print the trial plan and exit");
  app.add_flag("--verbose", flags.verbose, "Chatty progress on stderr");

  auto* se = app.add_subcommand("se", "Emit the state evolution trace CSV");
  auto* run = app.add_subcommand("run", "One seeded AMP run with full diagnostics");
  auto* experiment = app.add_subcommand("experiment", "Monte Carlo deviation campaign");
  auto* bounds = app.add_subcommand("bounds", "Empirical validation of the tail bounds");
  double kappa_scale = 1.0;
  bounds->add_option("--kappa-scale", kappa_scale,
                     "Scale every analytic rate (sensitivity probe)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return kExitOk;  // --help / --version
    std::cerr << e.what() << "\n";
    return kExitConfig;
  }

  try {
    flags.seed_set = seed_opt->count() > 0;
    if (se->parsed()) return cmd_se(flags);
    if (run->parsed()) return cmd_run(flags);
    if (experiment->parsed()) return cmd_experiment(flags);
    if (bounds->parsed()) return cmd_bounds(flags, kappa_scale);
    return kExitConfig;
  } catch (const amplab::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const amplab::IoError& e) {
    std::cerr << "io error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAssertion;
  }
}
