#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "xgem/nd/tensor.hpp"

namespace xgem::data {

/// Labelled samples with an optional binary attribute per record.
///
/// Binary quantities use {0, 1}. Sources that speak {-1, 1} are mapped at the
/// boundary, so nothing downstream sees a negative label.
struct Dataset {
  nd::Tensor features;          // [n x d], one flattened sample per row
  std::vector<int> labels;      // n entries
  std::vector<int> attributes;  // n entries, or empty when the source has none
  std::string provenance;

  std::size_t size() const { return labels.size(); }
  std::size_t dim() const { return features.rank() == 2 ? features.cols() : 0; }
  bool has_attributes() const { return !attributes.empty(); }

  nd::Tensor sample(std::size_t i) const { return features.row_at(i); }

  /// Throws ShapeError when the columns disagree in length.
  void validate() const;

  Dataset subset(std::span<const std::size_t> indices) const;
};

/// Maps a {-1, 1} label to {0, 1}; anything else is a ConfigError.
int from_signed_label(int v);

/// Writes `dir/manifest.json` (provenance, config, counts) and `dir/data.bin`
/// (f64 features, then i32 labels, then i32 attributes, little-endian).
/// The directory is created if missing.
void export_dataset(const std::filesystem::path& dir, const Dataset& ds, const nlohmann::json& config);

struct ImportedDataset {
  Dataset data;
  nlohmann::json config;
};

ImportedDataset import_dataset(const std::filesystem::path& dir);

}  // namespace xgem::data
