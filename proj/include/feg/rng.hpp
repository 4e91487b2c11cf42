#pragma once

#include <cstdint>
#include <random>

#include "feg/distribution.hpp"

namespace feg {

/// Deterministic per-worker random stream. The same (seed, stream_id) pair
/// yields the same sample sequence on every run and platform: the engine is
/// the standard-specified mt19937_64 and uniforms are built from raw bits.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed, std::uint32_t stream_id = 0);

  std::uint64_t seed() const { return seed_; }
  std::uint32_t stream_id() const { return stream_id_; }

  /// Uniform draw in [0, 1) with 53 random bits.
  double uniform01();

 private:
  std::uint64_t seed_;
  std::uint32_t stream_id_;
  std::mt19937_64 engine_;
};

/// Inverse-CDF sample of a flat index.
int sample(const FiniteDistribution& dist, RngStream& rng);

}  // namespace feg
