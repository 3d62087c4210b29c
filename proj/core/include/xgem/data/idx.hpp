#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "xgem/data/dataset.hpp"

namespace xgem::data {

// IDX files: big-endian u32 magic (0x00000803 images, 0x00000801 labels),
// big-endian u32 extents, then unsigned bytes. Nothing may follow the payload.
inline constexpr std::uint32_t kIdxImageMagic = 2051;
inline constexpr std::uint32_t kIdxLabelMagic = 2049;

struct IdxImages {
  std::size_t count = 0;
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::uint8_t> pixels;  // count * rows * cols
};

IdxImages read_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> read_idx_labels(const std::filesystem::path& path);

void write_idx_images(const std::filesystem::path& path, const IdxImages& images);
void write_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

/// Image/label pair as a dataset with pixels scaled to [0, 1] (byte / 255).
Dataset load_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

}  // namespace xgem::data
