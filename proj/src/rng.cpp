#include "feg/rng.hpp"

namespace feg {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, std::uint32_t stream_id)
    : seed_(seed),
      stream_id_(stream_id),
      engine_(splitmix64(seed ^ splitmix64(0x5117ULL + stream_id))) {}

double RngStream::uniform01() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

int sample(const FiniteDistribution& dist, RngStream& rng) {
  const double u = rng.uniform01();
  double acc = 0.0;
  const int n = dist.size();
  for (int i = 0; i < n; ++i) {
    acc += dist[i];
    if (u < acc) return i;
  }
  // u beyond the accumulated mass (fp rounding): last positive entry.
  for (int i = n - 1; i >= 0; --i)
    if (dist[i] > 0.0) return i;
  return n - 1;
}

}  // namespace feg
