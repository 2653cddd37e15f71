#pragma once

#include <cstdint>

namespace actguard {

/// splitmix64 finalizer. Used to derive independent, reproducible seed
/// streams from (base seed, stream id, index) tuples so that parallel
/// episodes and per-step draws never share generator state.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream) {
  return mix64(base ^ mix64(stream));
}

inline std::uint64_t mix_seed(std::uint64_t base, std::uint64_t stream,
                              std::uint64_t index) {
  return mix64(mix_seed(base, stream) ^ mix64(index + 0x51ed2701ULL));
}

}  // namespace actguard
