#include "xgem/random.hpp"

#include <algorithm>
#include <bit>
#include <numeric>

namespace xgem {

nd::Tensor normal_tensor(nd::Shape shape, Rng& rng, double mean, double stddev) {
  std::normal_distribution<double> dist(mean, stddev);
  std::vector<double> data(nd::element_count(shape));
  for (auto& v : data) v = dist(rng);
  return nd::Tensor(std::move(shape), std::move(data));
}

nd::Tensor uniform_tensor(nd::Shape shape, Rng& rng, double lo, double hi) {
  std::uniform_real_distribution<double> dist(lo, hi);
  std::vector<double> data(nd::element_count(shape));
  for (auto& v : data) v = dist(rng);
  return nd::Tensor(std::move(shape), std::move(data));
}

std::vector<std::size_t> permutation(std::size_t n, Rng& rng) {
  std::vector<std::size_t> idx(n);
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::shuffle(idx.begin(), idx.end(), rng);
  return idx;
}

std::uint64_t fnv1a64(std::span<const unsigned char> bytes, std::uint64_t state) {
  for (unsigned char b : bytes) {
    state ^= b;
    state *= 0x100000001b3ULL;
  }
  return state;
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

double keyed_uniform(std::uint64_t seed, std::span<const double> key) {
  std::uint64_t h = splitmix64(seed);
  for (double v : key) h = splitmix64(h ^ std::bit_cast<std::uint64_t>(v));
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace xgem
