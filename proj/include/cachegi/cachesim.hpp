#pragma once

// Set-associative LRU model of an L1 data cache (write-allocate).

#include <bit>
#include <charconv>
#include <cstdint>
#include <istream>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace cachegi {

struct CacheConfig {
  std::uint64_t size_bytes = 32768;
  std::uint64_t line_bytes = 64;
  std::uint64_t associativity = 8;

  std::uint64_t lines() const { return size_bytes / line_bytes; }
  std::uint64_t sets() const { return lines() / associativity; }

  /// Throws unless size = line * ways * sets with power-of-two sets and lines.
  void validate() const {
    if (line_bytes == 0 || associativity == 0 || size_bytes == 0)
      throw std::invalid_argument("cache geometry values must be positive");
    if (!std::has_single_bit(line_bytes)) throw std::invalid_argument("line_bytes must be a power of two");
    if (size_bytes % (line_bytes * associativity) != 0)
      throw std::invalid_argument("size_bytes must be a multiple of line_bytes * associativity");
    if (!std::has_single_bit(sets())) throw std::invalid_argument("number of sets must be a power of two");
  }
};

enum class AccessKind : std::uint8_t { read, write };

struct Access {
  AccessKind kind = AccessKind::read;
  std::uint64_t address = 0;
  std::uint32_t size_bytes = 4;

  bool operator==(const Access&) const = default;
};

struct CacheStats {
  std::uint64_t accesses = 0;
  std::uint64_t misses = 0;
  std::uint64_t evictions = 0;

  bool operator==(const CacheStats&) const = default;
};

/// Stateful cache. Each set keeps its ways ordered most- to least-recently
/// used; associativity is small, so a linear scan is the fast path.
class Cache {
 public:
  explicit Cache(const CacheConfig& cfg = {}) : cfg_(cfg) {
    cfg_.validate();
    line_shift_ = static_cast<unsigned>(std::countr_zero(cfg_.line_bytes));
    set_mask_ = cfg_.sets() - 1;
    ways_ = cfg_.associativity;
    tags_.assign(cfg_.sets() * ways_, kEmpty);
  }

  const CacheConfig& config() const noexcept { return cfg_; }
  const CacheStats& stats() const noexcept { return stats_; }

  void reset() {
    std::fill(tags_.begin(), tags_.end(), kEmpty);
    stats_ = {};
  }

  void access(const Access& a) {
    if (a.size_bytes < 1 || a.size_bytes > 8) throw std::invalid_argument("access size must be 1..8 bytes");
    ++stats_.accesses;
    const std::uint64_t first = a.address >> line_shift_;
    const std::uint64_t last = (a.address + a.size_bytes - 1) >> line_shift_;
    touch(first);
    if (last != first) touch(last);
  }

 private:
  static constexpr std::uint64_t kEmpty = std::numeric_limits<std::uint64_t>::max();

  void touch(std::uint64_t line) {
    std::uint64_t* set = tags_.data() + (line & set_mask_) * ways_;
    std::uint64_t w = 0;
    while (w < ways_ && set[w] != line) ++w;
    if (w == ways_) {
      ++stats_.misses;
      if (set[ways_ - 1] != kEmpty) ++stats_.evictions;
      w = ways_ - 1;
    }
    for (; w > 0; --w) set[w] = set[w - 1];
    set[0] = line;
  }

  CacheConfig cfg_;
  unsigned line_shift_ = 6;
  std::uint64_t set_mask_ = 0;
  std::uint64_t ways_ = 8;
  std::vector<std::uint64_t> tags_;
  CacheStats stats_;
};

inline CacheStats simulate(const CacheConfig& cfg, std::span<const Access> accesses) {
  Cache cache(cfg);
  for (const auto& a : accesses) cache.access(a);
  return cache.stats();
}

/// Reads a trace dump: one access per line, `R|W <hex address> <size>`.
/// Blank lines and lines starting with `#` are skipped.
inline std::vector<Access> read_trace_dump(std::istream& in) {
  std::vector<Access> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto first = line.find_first_not_of(" \t");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto fail = [&] { return std::runtime_error("trace dump line " + std::to_string(lineno) + ": malformed access"); };

    std::vector<std::string> tok;
    std::size_t i = first;
    while (i < line.size()) {
      const auto j = line.find_first_of(" \t", i);
      tok.push_back(line.substr(i, j == std::string::npos ? std::string::npos : j - i));
      if (j == std::string::npos) break;
      i = line.find_first_not_of(" \t", j);
      if (i == std::string::npos) break;
    }
    if (tok.size() != 3 || (tok[0] != "R" && tok[0] != "W")) throw fail();
    Access a;
    a.kind = tok[0] == "R" ? AccessKind::read : AccessKind::write;
    std::string_view addr = tok[1];
    if (addr.starts_with("0x") || addr.starts_with("0X")) addr.remove_prefix(2);
    auto r1 = std::from_chars(addr.data(), addr.data() + addr.size(), a.address, 16);
    auto r2 = std::from_chars(tok[2].data(), tok[2].data() + tok[2].size(), a.size_bytes);
    if (r1.ec != std::errc() || r1.ptr != addr.data() + addr.size() || r2.ec != std::errc() ||
        r2.ptr != tok[2].data() + tok[2].size() || a.size_bytes < 1 || a.size_bytes > 8)
      throw fail();
    out.push_back(a);
  }
  return out;
}

inline std::string format_access(const Access& a) {
  char buf[32];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, a.address, 16);
  return std::string(a.kind == AccessKind::read ? "R 0x" : "W 0x") + std::string(buf, p) + " " +
         std::to_string(a.size_bytes);
}

}  // namespace cachegi
