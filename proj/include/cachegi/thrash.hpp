#pragma once

// Helper for measurement harnesses: evict the L1 data cache before the
// measured region by writing and reading a buffer of the cache's size.
// The external driver exports CACHEGI_THRASH_BYTES when cache_thrash is on.

#include <cstddef>
#include <cstdlib>
#include <vector>

namespace cachegi {

inline std::size_t thrash_bytes_from_env(std::size_t fallback = 32768) {
  if (const char* v = std::getenv("CACHEGI_THRASH_BYTES")) {
    char* end = nullptr;
    const auto n = std::strtoull(v, &end, 10);
    if (end && *end == '\0' && n > 0) return static_cast<std::size_t>(n);
  }
  return fallback;
}

/// Returns a value derived from the buffer so the reads cannot be elided.
inline unsigned thrash_l1d(std::size_t bytes = thrash_bytes_from_env()) {
  static std::vector<unsigned char> buffer;
  buffer.resize(bytes);
  for (std::size_t i = 0; i < buffer.size(); ++i) buffer[i] = static_cast<unsigned char>(i);
  volatile unsigned sum = 0;
  for (unsigned char b : buffer) sum = sum + b;
  return sum;
}

}  // namespace cachegi
