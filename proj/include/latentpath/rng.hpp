#pragma once

#include <cstdint>
#include <random>

namespace latentpath {

/// SplitMix64 finalizer; maps (seed, stream) to well-separated 64-bit seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

/// Independent engine for stream `index` under `seed`. Streams do not depend
/// on the order in which they are created.
inline std::mt19937_64 stream_engine(std::uint64_t seed, std::uint64_t index) {
  return std::mt19937_64(splitmix64(splitmix64(seed) ^ splitmix64(index + 0x632BE59BD9B4E019ull)));
}

}  // namespace latentpath
