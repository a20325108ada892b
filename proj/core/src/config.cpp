#include "amplab/config.hpp"

#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>

#include "amplab/errors.hpp"

namespace amplab {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& message) {
  throw ConfigError(path + ": " + message);
}

void check_keys(const json& obj, const std::string& path, std::set<std::string> allowed) {
  if (!obj.is_object()) fail(path, "expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it)
    if (!allowed.count(it.key())) fail(path + "." + it.key(), "unknown key");
}

template <class T>
T require(const json& obj, const std::string& path, const char* key);

template <>
double require<double>(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing required key");
  const auto& v = obj.at(key);
  if (!v.is_number()) fail(path + "." + key, "expected a number");
  return v.get<double>();
}

template <>
std::string require<std::string>(const json& obj, const std::string& path, const char* key) {
  if (!obj.contains(key)) fail(path + "." + key, "missing required key");
  const auto& v = obj.at(key);
  if (!v.is_string()) fail(path + "." + key, "expected a string");
  return v.get<std::string>();
}

double get_num(const json& obj, const std::string& path, const char* key, double fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number()) fail(path + "." + key, "expected a number");
  return obj.at(key).get<double>();
}

int get_int(const json& obj, const std::string& path, const char* key, int fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_number_integer()) fail(path + "." + key, "expected an integer");
  return obj.at(key).get<int>();
}

bool get_bool(const json& obj, const std::string& path, const char* key, bool fallback) {
  if (!obj.contains(key)) return fallback;
  if (!obj.at(key).is_boolean()) fail(path + "." + key, "expected a boolean");
  return obj.at(key).get<bool>();
}

SignalPrior parse_prior(const json& obj, const std::string& path) {
  check_keys(obj, path, {"kind", "sparsity", "variance", "values", "probs"});
  const std::string kind = require<std::string>(obj, path, "kind");
  try {
    if (kind == "rademacher") return SignalPrior::rademacher();
    if (kind == "bernoulli_gaussian")
      return SignalPrior::bernoulli_gaussian(require<double>(obj, path, "sparsity"),
                                             require<double>(obj, path, "variance"));
    if (kind == "gaussian") return SignalPrior::gaussian(require<double>(obj, path, "variance"));
    if (kind == "point_mass") {
      if (!obj.contains("values") || !obj.contains("probs"))
        fail(path, "point_mass prior needs values and probs");
      return SignalPrior::point_mass(obj.at("values").get<std::vector<double>>(),
                                     obj.at("probs").get<std::vector<double>>());
    }
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  fail(path + ".kind", "unknown prior kind '" + kind + "'");
}

NoiseSpec parse_noise(const json& obj, const std::string& path) {
  check_keys(obj, path, {"kind", "variance"});
  NoiseSpec spec;
  const std::string kind = require<std::string>(obj, path, "kind");
  if (kind == "gaussian")
    spec.kind = NoiseKind::Gaussian;
  else if (kind == "uniform")
    spec.kind = NoiseKind::Uniform;
  else if (kind == "rademacher")
    spec.kind = NoiseKind::Rademacher;
  else
    fail(path + ".kind", "unknown noise kind '" + kind + "'");
  spec.variance = require<double>(obj, path, "variance");
  try {
    spec.validate();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  return spec;
}

Denoiser parse_denoiser(const json& obj, const std::string& path) {
  check_keys(obj, path, {"family", "alpha", "sparsity", "variance", "tau_source"});
  const std::string family = require<std::string>(obj, path, "family");
  Denoiser d;
  try {
    if (family == "soft_threshold")
      d = Denoiser::soft_threshold(get_num(obj, path, "alpha", 1.5));
    else if (family == "tanh_bayes")
      d = Denoiser::tanh_bayes();
    else if (family == "bernoulli_gaussian_bayes")
      d = Denoiser::bernoulli_gaussian_bayes(require<double>(obj, path, "sparsity"),
                                             require<double>(obj, path, "variance"));
    else if (family == "identity")
      d = Denoiser::identity();
    else if (family == "zero")
      d = Denoiser::zero();
    else
      fail(path + ".family", "unknown denoiser family '" + family + "'");
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  if (obj.contains("tau_source")) {
    const std::string src = obj.at("tau_source").get<std::string>();
    if (src == "se")
      d.tau_source = TauSource::SeTrace;
    else if (src == "online")
      d.tau_source = TauSource::Online;
    else
      fail(path + ".tau_source", "expected 'se' or 'online'");
  }
  return d;
}

StoppingCriterion parse_stopping(const json& obj, const std::string& path) {
  check_keys(obj, path, {"mode", "eps0", "eps0_prime", "eps1", "eps2", "eps3"});
  const std::string mode = require<std::string>(obj, path, "mode");
  try {
    if (mode == "bayes")
      return StoppingCriterion::bayes(get_num(obj, path, "eps0", 1e-8),
                                      get_num(obj, path, "eps0_prime", 1e-4));
    if (mode == "general")
      return StoppingCriterion::general(get_num(obj, path, "eps1", 1e-10),
                                        get_num(obj, path, "eps2", 1e-12),
                                        get_num(obj, path, "eps3", 1e-12));
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }
  fail(path + ".mode", "expected 'bayes' or 'general'");
}

}  // namespace

FileConfig parse_config(const json& doc) {
  check_keys(doc, "config", {"model", "denoiser", "se", "experiment"});
  FileConfig out;

  if (!doc.contains("model")) fail("config.model", "missing required section");
  {
    const json& model = doc.at("model");
    check_keys(model, "model", {"prior", "noise", "delta", "n"});
    if (!model.contains("prior")) fail("model.prior", "missing required key");
    out.prior = parse_prior(model.at("prior"), "model.prior");
    if (model.contains("noise")) out.noise = parse_noise(model.at("noise"), "model.noise");
    out.delta = require<double>(model, "model", "delta");
    if (!(out.delta > 0.0)) fail("model.delta", "delta must be > 0");
    out.n = get_int(model, "model", "n", out.n);
    if (out.n < 1) fail("model.n", "n must be >= 1");
    const double Nd = out.n / out.delta;
    if (std::abs(Nd - std::llround(Nd)) > 1e-9)
      fail("model", "n/delta must be an integer (dimension mismatch)");
  }

  if (!doc.contains("denoiser")) fail("config.denoiser", "missing required section");
  out.denoiser = parse_denoiser(doc.at("denoiser"), "denoiser");

  if (doc.contains("se")) {
    const json& se = doc.at("se");
    check_keys(se, "se", {"t_max", "stopping"});
    out.t_max = get_int(se, "se", "t_max", out.t_max);
    if (out.t_max < 1) fail("se.t_max", "t_max must be >= 1");
    if (se.contains("stopping")) out.stopping = parse_stopping(se.at("stopping"), "se.stopping");
  }

  if (doc.contains("experiment")) {
    const json& exp = doc.at("experiment");
    check_keys(exp, "experiment",
               {"n_grid", "trials", "epsilon_grid", "iterations", "losses", "gaussianity", "seed",
                "threads"});
    if (exp.contains("n_grid")) {
      if (!exp.at("n_grid").is_array()) fail("experiment.n_grid", "expected an array");
      out.n_grid = exp.at("n_grid").get<std::vector<int>>();
    }
    out.trials = get_int(exp, "experiment", "trials", out.trials);
    if (exp.contains("epsilon_grid"))
      out.epsilon_grid = exp.at("epsilon_grid").get<std::vector<double>>();
    out.iterations = get_int(exp, "experiment", "iterations", out.iterations);
    if (exp.contains("losses")) {
      out.losses.clear();
      for (const auto& item : exp.at("losses")) {
        const std::string name = item.get<std::string>();
        if (name == "squared")
          out.losses.push_back(LossKind::Squared);
        else if (name == "absolute")
          out.losses.push_back(LossKind::Absolute);
        else
          fail("experiment.losses", "unknown loss '" + name + "'");
      }
    }
    out.gaussianity = get_bool(exp, "experiment", "gaussianity", out.gaussianity);
    if (exp.contains("seed")) {
      if (!exp.at("seed").is_number_unsigned() && !exp.at("seed").is_number_integer())
        fail("experiment.seed", "expected an integer seed");
      out.seed = exp.at("seed").get<std::uint64_t>();
    }
    out.threads = get_int(exp, "experiment", "threads", out.threads);
    if (out.threads < 0) fail("experiment.threads", "threads must be >= 0");
  }

  // Cross-field validation through the experiment view.
  try {
    to_experiment_config(out).validate();
  } catch (const std::invalid_argument& e) {
    fail("config", e.what());
  }
  return out;
}

FileConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw ConfigError("cannot open config file: " + path.string());
  std::stringstream buffer;
  buffer << is.rdbuf();
  const std::string text = buffer.str();
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    // Convert the byte offset into a line/column diagnostic.
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ConfigError(path.string() + ":" + std::to_string(line) + ":" + std::to_string(col) +
                      ": " + e.what());
  }
  return parse_config(doc);
}

nlohmann::json to_json(const FileConfig& config) {
  json prior;
  switch (config.prior.kind) {
    case PriorKind::Rademacher:
      prior = {{"kind", "rademacher"}};
      break;
    case PriorKind::BernoulliGaussian:
      prior = {{"kind", "bernoulli_gaussian"},
               {"sparsity", config.prior.sparsity},
               {"variance", config.prior.variance}};
      break;
    case PriorKind::Gaussian:
      prior = {{"kind", "gaussian"}, {"variance", config.prior.variance}};
      break;
    case PriorKind::PointMass:
      prior = {{"kind", "point_mass"}, {"values", config.prior.values},
               {"probs", config.prior.probs}};
      break;
  }
  json noise = {{"kind", config.noise.kind == NoiseKind::Gaussian    ? "gaussian"
                         : config.noise.kind == NoiseKind::Uniform   ? "uniform"
                                                                     : "rademacher"},
                {"variance", config.noise.variance}};
  json denoiser;
  switch (config.denoiser.family) {
    case DenoiserFamily::SoftThreshold:
      denoiser = {{"family", "soft_threshold"}, {"alpha", config.denoiser.alpha}};
      break;
    case DenoiserFamily::TanhBayes:
      denoiser = {{"family", "tanh_bayes"}};
      break;
    case DenoiserFamily::BernoulliGaussianBayes:
      denoiser = {{"family", "bernoulli_gaussian_bayes"},
                  {"sparsity", config.denoiser.sparsity},
                  {"variance", config.denoiser.variance}};
      break;
    case DenoiserFamily::Identity:
      denoiser = {{"family", "identity"}};
      break;
    case DenoiserFamily::Zero:
      denoiser = {{"family", "zero"}};
      break;
  }
  denoiser["tau_source"] = config.denoiser.tau_source == TauSource::SeTrace ? "se" : "online";

  json stopping;
  if (config.stopping.mode == StoppingCriterion::Mode::BayesOptimal)
    stopping = {{"mode", "bayes"},
                {"eps0", config.stopping.eps0},
                {"eps0_prime", config.stopping.eps0_prime}};
  else
    stopping = {{"mode", "general"},
                {"eps1", config.stopping.eps1},
                {"eps2", config.stopping.eps2},
                {"eps3", config.stopping.eps3}};

  std::vector<std::string> losses;
  for (LossKind k : config.losses) losses.emplace_back(loss_name(k));

  return json{{"model", {{"prior", prior}, {"noise", noise}, {"delta", config.delta},
                         {"n", config.n}}},
              {"denoiser", denoiser},
              {"se", {{"t_max", config.t_max}, {"stopping", stopping}}},
              {"experiment",
               {{"n_grid", config.n_grid},
                {"trials", config.trials},
                {"epsilon_grid", config.epsilon_grid},
                {"iterations", config.iterations},
                {"losses", losses},
                {"gaussianity", config.gaussianity},
                {"seed", config.seed},
                {"threads", config.threads}}}};
}

ExperimentConfig to_experiment_config(const FileConfig& config) {
  ExperimentConfig out;
  out.prior = config.prior;
  out.noise = config.noise;
  out.delta = config.delta;
  out.denoiser = config.denoiser;
  out.losses = config.losses;
  out.iterations = config.iterations;
  out.stopping = config.stopping;
  out.t_max = config.t_max;
  out.n_grid = config.n_grid;
  out.trials = config.trials;
  out.epsilon_grid = config.epsilon_grid;
  out.master_seed = config.seed;
  out.threads = config.threads;
  out.gaussianity = config.gaussianity;
  return out;
}

}  // namespace amplab
