#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>

namespace oac {

inline constexpr std::uint64_t kFnvOffsetBasis = 14695981039346656037ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

// 64-bit FNV-1a over raw bytes. A non-zero seed is folded into the offset
// basis; seed 0 is textbook FNV-1a.
inline std::uint64_t fnv1a(const void* data, std::size_t n,
                           std::uint64_t seed = 0) {
  std::uint64_t h = kFnvOffsetBasis ^ seed;
  const auto* p = static_cast<const unsigned char*>(data);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0) {
  return fnv1a(bytes.data(), bytes.size(), seed);
}

// Absorbs 32-bit words into an ongoing FNV-1a state.
inline std::uint64_t fnv1aStep(std::uint64_t h, std::uint32_t word) {
  for (int shift = 0; shift < 32; shift += 8) {
    h ^= (word >> shift) & 0xffu;
    h *= kFnvPrime;
  }
  return h;
}

inline std::uint64_t fnv1aIds(std::span<const std::uint32_t> ids,
                              std::uint64_t h = kFnvOffsetBasis) {
  for (std::uint32_t id : ids) h = fnv1aStep(h, id);
  return h;
}

}  // namespace oac
