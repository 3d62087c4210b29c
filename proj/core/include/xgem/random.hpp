#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "xgem/nd/tensor.hpp"

namespace xgem {

/// The one engine used everywhere a seed appears. Seeded runs are bitwise
/// reproducible for a given standard library.
using Rng = std::mt19937_64;

nd::Tensor normal_tensor(nd::Shape shape, Rng& rng, double mean = 0.0, double stddev = 1.0);
nd::Tensor uniform_tensor(nd::Shape shape, Rng& rng, double lo, double hi);
std::vector<std::size_t> permutation(std::size_t n, Rng& rng);

/// Uniform [0, 1) draw derived from a seed and the bit patterns of `key`.
/// Used where a randomized decision has to depend on *what* is decided, not on
/// the order decisions are made in.
double keyed_uniform(std::uint64_t seed, std::span<const double> key);

/// 64-bit FNV-1a over raw bytes; stable across platforms and runs.
std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t state = 0xcbf29ce484222325ULL);

}  // namespace xgem
