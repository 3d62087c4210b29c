#include "xgem/experiments/runner.hpp"

#include <string_view>

#include "xgem/error.hpp"
#include "xgem/experiments/bias_audit.hpp"
#include "xgem/experiments/manifolds.hpp"
#include "xgem/experiments/mnist.hpp"
#include "xgem/experiments/parabola.hpp"

namespace xgem::experiments {

using nlohmann::json;

namespace {

template <class Config>
Config parse(const json& j, const std::optional<std::uint64_t>& seed) {
  Config c;
  try {
    c = j.get<Config>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  if (seed) c.seed = *seed;
  return c;
}

ExperimentKind kind_of(const json& config) {
  if (!config.is_object() || !config.contains("experiment") || !config.at("experiment").is_string()) {
    throw ConfigError("config: missing \"experiment\" (parabola_fig1, bias_audit, confidence_manifolds, mnist_xgem)");
  }
  return experiment_kind_from_string(config.at("experiment").get<std::string>());
}

bool is_csv(const std::string& name) {
  return name.size() >= 4 && std::string_view(name).substr(name.size() - 4) == ".csv";
}

}  // namespace

json run_experiment(const json& config, const std::optional<std::uint64_t>& seed,
                    const std::optional<std::filesystem::path>& out) {
  switch (kind_of(config)) {
    case ExperimentKind::parabola_fig1:
      return run_parabola_fig1(parse<ParabolaFig1Config>(config, seed), out).summary();
    case ExperimentKind::bias_audit:
      return run_bias_audit(parse<BiasAuditConfig>(config, seed), out).summary();
    case ExperimentKind::confidence_manifolds:
      return run_confidence_manifolds(parse<ConfidenceManifoldsConfig>(config, seed), out).summary();
    case ExperimentKind::mnist_xgem:
      return run_mnist_xgem(parse<MnistXgemConfig>(config, seed), out).summary();
  }
  throw ConfigError("config: unknown experiment");
}

json resolved_config(const json& config, const std::optional<std::uint64_t>& seed) {
  auto resolve = [&]<class Config>(Config c) {
    c.resolve();
    return json(c);
  };
  switch (kind_of(config)) {
    case ExperimentKind::parabola_fig1: return resolve(parse<ParabolaFig1Config>(config, seed));
    case ExperimentKind::bias_audit: return resolve(parse<BiasAuditConfig>(config, seed));
    case ExperimentKind::confidence_manifolds: return resolve(parse<ConfidenceManifoldsConfig>(config, seed));
    case ExperimentKind::mnist_xgem: return resolve(parse<MnistXgemConfig>(config, seed));
  }
  throw ConfigError("config: unknown experiment");
}

ReplayCheck replay_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out) {
  const Manifest recorded = read_manifest(manifest);
  json config = recorded.config;
  config["experiment"] = to_string(recorded.kind);
  run_experiment(config, recorded.seed, out);
  const Manifest again = read_manifest(out);

  ReplayCheck check;
  for (const auto& [name, hash] : recorded.artifacts) {
    if (!is_csv(name)) continue;
    const auto it = again.artifacts.find(name);
    if (it == again.artifacts.end()) {
      check.missing.push_back(name);
    } else if (it->second == hash) {
      check.matched.push_back(name);
    } else {
      check.mismatched.push_back(name);
    }
  }
  for (const auto& [name, hash] : again.artifacts) {
    if (is_csv(name) && !recorded.artifacts.contains(name)) check.missing.push_back(name);
  }
  return check;
}

}  // namespace xgem::experiments
