#pragma once

#include <cmath>
#include <cstdint>
#include <random>

#include <Eigen/Dense>

namespace hetnet {

using Rng = std::mt19937_64;

/// SplitMix64 finalizer.
constexpr std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Independent child seed for stream `stream` of `seed`. Drop seeds are
/// split_seed(master_seed, drop_index); per-drop substreams use the
/// SeedStream tags below.
constexpr std::uint64_t split_seed(std::uint64_t seed, std::uint64_t stream) {
  return splitmix64(seed ^ splitmix64(stream + 0x632BE59BD9B4E019ULL));
}

enum class SeedStream : std::uint64_t {
  kLayout = 1,
  kChannel = 2,
  kCsiError = 3,
  kBer = 4,
};

constexpr std::uint64_t split_seed(std::uint64_t seed, SeedStream stream) {
  return split_seed(seed, static_cast<std::uint64_t>(stream));
}

/// Matrix of i.i.d. CN(0, variance) entries; real and imaginary parts are
/// N(0, variance / 2). Entries are drawn in column-major order.
inline Eigen::MatrixXcd complex_gaussian(Eigen::Index rows, Eigen::Index cols,
                                         double variance, Rng& rng) {
  std::normal_distribution<double> normal(0.0, std::sqrt(variance / 2.0));
  Eigen::MatrixXcd out(rows, cols);
  for (Eigen::Index c = 0; c < cols; ++c) {
    for (Eigen::Index r = 0; r < rows; ++r) {
      const double re = normal(rng);
      const double im = normal(rng);
      out(r, c) = {re, im};
    }
  }
  return out;
}

}  // namespace hetnet
