#pragma once

#include <cstdint>
#include <random>

namespace robadd {

/// SplitMix64 step; used to mix seeds for independent substreams.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Engine for (master seed, replicate index, purpose tag). Streams derived
/// this way are independent of scheduling, so replicate-level parallelism
/// cannot change any draw.
inline std::mt19937_64 make_stream(std::uint64_t master, std::uint64_t replicate,
                                   std::uint64_t purpose) {
  std::uint64_t s = master;
  std::uint64_t a = splitmix64(s);
  s ^= replicate * 0x9e3779b97f4a7c15ULL;
  std::uint64_t b = splitmix64(s);
  s ^= purpose * 0xd1b54a32d192ed03ULL;
  std::uint64_t c = splitmix64(s);
  return std::mt19937_64(a ^ (b << 1) ^ (c << 2));
}

}  // namespace robadd
