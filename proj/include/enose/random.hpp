#pragma once

#include <cstdint>
#include <random>

namespace enose {

using Rng = std::mt19937_64;

/// splitmix64 finalizer; used to derive independent child seeds.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Child seed for (master, tag). Stable across runs and platforms.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t tag) {
  return mix_seed(mix_seed(master) ^ mix_seed(tag + 0x632be59bd9b4e019ULL));
}

}  // namespace enose
