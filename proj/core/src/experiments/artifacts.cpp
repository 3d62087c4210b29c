#include "xgem/experiments/artifacts.hpp"

#include <cstdio>
#include <span>

#include "xgem/error.hpp"
#include "xgem/io/binary.hpp"
#include "xgem/random.hpp"

namespace xgem::experiments {

namespace {
constexpr int kManifestVersion = 1;
}

std::string to_string(ExperimentKind k) {
  switch (k) {
    case ExperimentKind::parabola_fig1: return "parabola_fig1";
    case ExperimentKind::bias_audit: return "bias_audit";
    case ExperimentKind::confidence_manifolds: return "confidence_manifolds";
    case ExperimentKind::mnist_xgem: return "mnist_xgem";
  }
  return "unknown";
}

ExperimentKind experiment_kind_from_string(const std::string& s) {
  for (auto k : {ExperimentKind::parabola_fig1, ExperimentKind::bias_audit, ExperimentKind::confidence_manifolds,
                 ExperimentKind::mnist_xgem}) {
    if (to_string(k) == s) return k;
  }
  throw ConfigError("unknown experiment kind '" + s + "'");
}

std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  const auto bytes = std::span(reinterpret_cast<const unsigned char*>(tag.data()), tag.size());
  std::uint64_t h = fnv1a64(bytes) ^ seed;
  // splitmix64 finalizer
  h += 0x9e3779b97f4a7c15ULL;
  h = (h ^ (h >> 30)) * 0xbf58476d1ce4e5b9ULL;
  h = (h ^ (h >> 27)) * 0x94d049bb133111ebULL;
  return h ^ (h >> 31);
}

std::string content_hash(std::string_view bytes) {
  const auto h = fnv1a64(std::span(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size()));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

ArtifactSink::ArtifactSink(std::filesystem::path dir, ExperimentKind kind) : dir_(std::move(dir)), kind_(kind) {
  const auto existing = dir_ / kManifestName;
  if (std::filesystem::exists(existing)) {
    const Manifest m = read_manifest(existing);
    if (m.kind != kind_) {
      throw ConfigError(dir_.string() + " holds output of a " + to_string(m.kind) + " run; refusing to write " +
                        to_string(kind_) + " artifacts there");
    }
  }
  std::error_code ec;
  std::filesystem::create_directories(dir_, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir_.string() + ": " + ec.message());
}

void ArtifactSink::write(const std::string& name, std::string_view content) {
  const auto path = dir_ / name;
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  io::write_text(path, content);
  hashes_[name] = content_hash(content);
}

void ArtifactSink::finish(std::uint64_t seed, const nlohmann::json& config, const nlohmann::json& summary) {
  nlohmann::json m;
  m["manifest_version"] = kManifestVersion;
  m["experiment"] = to_string(kind_);
  m["seed"] = seed;
  m["config"] = config;
  m["artifacts"] = hashes_;
  m["summary"] = summary;
  io::write_text(dir_ / kManifestName, m.dump(2) + "\n");
}

Manifest read_manifest(const std::filesystem::path& path) {
  const auto file = std::filesystem::is_directory(path) ? path / kManifestName : path;
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(io::read_text(file));
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::inconsistent, file.string() + ": " + e.what());
  }
  if (j.value("manifest_version", 0) != kManifestVersion) {
    throw FormatError(FormatError::Kind::version_mismatch, file.string() + ": unsupported manifest version");
  }
  Manifest m;
  try {
    m.kind = experiment_kind_from_string(j.at("experiment").get<std::string>());
    m.seed = j.at("seed").get<std::uint64_t>();
    m.config = j.at("config");
    m.artifacts = j.at("artifacts").get<std::map<std::string, std::string>>();
    m.summary = j.value("summary", nlohmann::json::object());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(FormatError::Kind::inconsistent, file.string() + ": " + e.what());
  }
  return m;
}

}  // namespace xgem::experiments
