#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "amplab/harness.hpp"

namespace amplab {

/// Parsed experiment configuration file. A single JSON document with
/// sections model / denoiser / se / experiment; unknown keys anywhere are
/// errors. The experiment section is optional and defaults to the values
/// below.
struct FileConfig {
  SignalPrior prior = SignalPrior::bernoulli_gaussian(0.1, 1.0);
  NoiseSpec noise{NoiseKind::Gaussian, 0.01};
  double delta = 0.5;
  int n = 2000;

  Denoiser denoiser = Denoiser::soft_threshold(1.5);

  int t_max = 30;
  StoppingCriterion stopping = StoppingCriterion::general(1e-10, 1e-12, 1e-12);

  std::vector<int> n_grid = {100, 200, 400, 800};
  int trials = 100;
  std::vector<double> epsilon_grid = {0.05};
  int iterations = 6;
  std::vector<LossKind> losses = {LossKind::Squared, LossKind::Absolute};
  bool gaussianity = false;
  std::uint64_t seed = 1;
  int threads = 1;
};

// Throws ConfigError with line/field context on parse or validation failure.
FileConfig parse_config_file(const std::filesystem::path& path);
FileConfig parse_config(const nlohmann::json& doc);

nlohmann::json to_json(const FileConfig& config);

ExperimentConfig to_experiment_config(const FileConfig& config);

}  // namespace amplab
