#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgem/experiments/artifacts.hpp"

namespace xgem::experiments {

/// Runs the experiment named by `config["experiment"]`. Missing keys take
/// their defaults; `seed` overrides the config's seed when set. Returns the
/// run summary.
nlohmann::json run_experiment(const nlohmann::json& config, const std::optional<std::uint64_t>& seed,
                              const std::optional<std::filesystem::path>& out);

/// The full resolved config the run would use, with every default filled in.
nlohmann::json resolved_config(const nlohmann::json& config, const std::optional<std::uint64_t>& seed = std::nullopt);

struct ReplayCheck {
  std::vector<std::string> matched;
  std::vector<std::string> mismatched;  // hash differs
  std::vector<std::string> missing;     // recorded but not produced, or the reverse

  bool ok() const { return mismatched.empty() && missing.empty(); }
};

/// Re-runs the manifest's config into `out` and compares the hashes of every
/// CSV artifact against the recorded ones.
ReplayCheck replay_manifest(const std::filesystem::path& manifest, const std::filesystem::path& out);

}  // namespace xgem::experiments
