#pragma once

// Independent reference implementations used to check the library. They
// favour the most literal reading of each definition over speed.

#include <cstdint>
#include <list>
#include <random>
#include <vector>

#include "cachegi/cachesim.hpp"

namespace oracle {

/// LRU cache as one linked list per set, most recent at the front, with a
/// linear search for every touch. Counts misses only.
inline std::uint64_t naive_lru_misses(std::uint64_t size, std::uint64_t line, std::uint64_t ways,
                                      const std::vector<cachegi::Access>& trace) {
  const std::uint64_t sets = size / line / ways;
  std::vector<std::list<std::uint64_t>> lru(sets);
  std::uint64_t misses = 0;
  const auto touch = [&](std::uint64_t tag_line) {
    auto& s = lru[tag_line % sets];
    for (auto it = s.begin(); it != s.end(); ++it) {
      if (*it == tag_line) {
        s.erase(it);
        s.push_front(tag_line);
        return;
      }
    }
    ++misses;
    s.push_front(tag_line);
    if (s.size() > ways) s.pop_back();
  };
  for (const auto& a : trace) {
    const std::uint64_t first = a.address / line;
    const std::uint64_t last = (a.address + a.size_bytes - 1) / line;
    for (std::uint64_t l = first; l <= last; ++l) touch(l);
  }
  return misses;
}

/// Mann-Whitney U of `a` against `b` by counting pairs (ties count one half).
inline double pairwise_u(const std::vector<double>& a, const std::vector<double>& b) {
  double u = 0;
  for (double x : a)
    for (double y : b) u += x > y ? 1.0 : (x == y ? 0.5 : 0.0);
  return u;
}

/// Exact two-sided p: the share of all ways to split the pooled values into
/// groups of sizes |a| and |b| whose U lies at least as far from its mean.
inline double brute_force_mw_p(const std::vector<double>& a, const std::vector<double>& b) {
  std::vector<double> pooled(a);
  pooled.insert(pooled.end(), b.begin(), b.end());
  const std::size_t na = a.size(), n = pooled.size();
  const double mu = static_cast<double>(na * b.size()) / 2.0;
  const double observed = std::abs(pairwise_u(a, b) - mu);
  std::uint64_t total = 0, extreme = 0;
  std::vector<bool> pick(n, false);
  std::fill(pick.begin(), pick.begin() + static_cast<std::ptrdiff_t>(na), true);
  // std::prev_permutation walks every distinct arrangement of the mask.
  do {
    std::vector<double> ga, gb;
    for (std::size_t i = 0; i < n; ++i) (pick[i] ? ga : gb).push_back(pooled[i]);
    ++total;
    if (std::abs(pairwise_u(ga, gb) - mu) >= observed) ++extreme;
  } while (std::prev_permutation(pick.begin(), pick.end()));
  return static_cast<double>(extreme) / static_cast<double>(total);
}

/// Fraction of `trials` in which `draws` uniform picks from `n` coupons
/// collect every coupon.
inline double coupon_coverage(std::int64_t n, std::int64_t draws, int trials, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::int64_t> pick(0, n - 1);
  int covered = 0;
  std::vector<char> seen(static_cast<std::size_t>(n));
  for (int t = 0; t < trials; ++t) {
    std::fill(seen.begin(), seen.end(), 0);
    std::int64_t distinct = 0;
    for (std::int64_t d = 0; d < draws && distinct < n; ++d) {
      auto& s = seen[static_cast<std::size_t>(pick(rng))];
      if (!s) {
        s = 1;
        ++distinct;
      }
    }
    if (distinct == n) ++covered;
  }
  return static_cast<double>(covered) / trials;
}

/// Random trace of `count` accesses inside `span` bytes, sizes 1..8.
inline std::vector<cachegi::Access> random_trace(std::mt19937_64& rng, std::size_t count, std::uint64_t span) {
  std::uniform_int_distribution<std::uint64_t> addr(0, span - 1);
  std::uniform_int_distribution<std::uint32_t> size(1, 8);
  std::bernoulli_distribution write(0.3);
  std::vector<cachegi::Access> t;
  t.reserve(count);
  for (std::size_t i = 0; i < count; ++i)
    t.push_back({write(rng) ? cachegi::AccessKind::write : cachegi::AccessKind::read, addr(rng), size(rng)});
  return t;
}

}  // namespace oracle
