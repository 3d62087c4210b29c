#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

namespace xgem::experiments {

enum class ExperimentKind { parabola_fig1, bias_audit, confidence_manifolds, mnist_xgem };

std::string to_string(ExperimentKind k);
ExperimentKind experiment_kind_from_string(const std::string& s);

/// Independent stream seed for one consumer (`tag`) of a global seed.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag);

/// Hex FNV-1a 64 of a byte string.
std::string content_hash(std::string_view bytes);

/// Output directory of one experiment run. Every file goes through `write`,
/// which records its hash for the manifest.
class ArtifactSink {
 public:
  /// Creates `dir` if needed. Throws ConfigError when `dir` already holds the
  /// manifest of a different experiment kind.
  ArtifactSink(std::filesystem::path dir, ExperimentKind kind);

  void write(const std::string& name, std::string_view content);
  const std::filesystem::path& dir() const noexcept { return dir_; }
  const std::map<std::string, std::string>& hashes() const noexcept { return hashes_; }

  /// Writes `manifest.json` with the kind, seed, resolved config, artifact
  /// hashes and a summary block.
  void finish(std::uint64_t seed, const nlohmann::json& config, const nlohmann::json& summary);

 private:
  std::filesystem::path dir_;
  ExperimentKind kind_;
  std::map<std::string, std::string> hashes_;
};

struct Manifest {
  ExperimentKind kind;
  std::uint64_t seed = 0;
  nlohmann::json config;
  std::map<std::string, std::string> artifacts;
  nlohmann::json summary;
};

inline constexpr const char* kManifestName = "manifest.json";

/// Accepts the manifest file itself or the directory holding it.
Manifest read_manifest(const std::filesystem::path& path);

}  // namespace xgem::experiments
