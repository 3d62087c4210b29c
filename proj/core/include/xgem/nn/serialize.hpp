#pragma once

#include <filesystem>
#include <variant>

#include <nlohmann/json.hpp>

#include "xgem/nn/classifier.hpp"
#include "xgem/nn/train.hpp"
#include "xgem/nn/vae.hpp"

namespace xgem::nn {

// nlohmann ADL hooks. Missing keys fall back to the struct defaults.
void to_json(nlohmann::json& j, const MlpSpec& s);
void from_json(const nlohmann::json& j, MlpSpec& s);
void to_json(nlohmann::json& j, const VaeSpec& s);
void from_json(const nlohmann::json& j, VaeSpec& s);
void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

/// Checkpoint container, all integers little-endian:
///
///   magic        8 bytes  "XGEMCKPT"
///   version      u32      kCheckpointVersion
///   model_kind   u32      1 = classifier, 2 = vae
///   spec_length  u64
///   spec         spec_length bytes of UTF-8 JSON (MlpSpec or VaeSpec)
///   tensors      u32 count, then per tensor: u32 rank, u64 extents[rank],
///                f64 values[product(extents)] (IEEE-754 binary64)
///
/// Nothing may follow the last tensor. Loading either returns a complete,
/// validated model or throws FormatError; it never returns a partial model.
inline constexpr std::uint32_t kCheckpointVersion = 1;

enum class ModelKind : std::uint32_t { classifier = 1, vae = 2 };

using AnyModel = std::variant<Classifier, Vae>;

void save_model(const std::filesystem::path& path, const Classifier& model);
void save_model(const std::filesystem::path& path, const Vae& model);

AnyModel load_model(const std::filesystem::path& path);
Classifier load_classifier(const std::filesystem::path& path);
Vae load_vae(const std::filesystem::path& path);

}  // namespace xgem::nn
