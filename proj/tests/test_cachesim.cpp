#include <random>
#include <sstream>
#include <unordered_set>

#include <gtest/gtest.h>

#include "cachegi/cachesim.hpp"
#include "oracles.hpp"

using namespace cachegi;

namespace {

std::vector<Access> sequential(std::uint64_t bytes, int passes = 1) {
  std::vector<Access> t;
  for (int p = 0; p < passes; ++p)
    for (std::uint64_t a = 0; a < bytes; a += 4) t.push_back({AccessKind::read, a, 4});
  return t;
}

}  // namespace

TEST(CacheConfig, Defaults) {
  const CacheConfig c;
  EXPECT_EQ(c.lines(), 512u);
  EXPECT_EQ(c.sets(), 64u);
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW((CacheConfig{32768, 48, 8}.validate()), std::invalid_argument);
  EXPECT_THROW((CacheConfig{3 * 64 * 8, 64, 8}.validate()), std::invalid_argument);
  EXPECT_THROW((CacheConfig{32768, 64, 0}.validate()), std::invalid_argument);
}

TEST(Simulate, AnalyticCases) {
  const CacheConfig c;
  const std::vector<Access> one{{AccessKind::read, 0, 4}};
  EXPECT_EQ(simulate(c, one).misses, 1u);
  EXPECT_EQ(simulate(c, one).accesses, 1u);
  EXPECT_EQ(simulate(c, sequential(65536)).misses, 1024u);
  EXPECT_EQ(simulate(c, sequential(16384, 2)).misses, 256u);
}

TEST(Simulate, ColumnMajorThrashes) {
  std::vector<Access> col, row;
  for (std::uint64_t i = 0; i < 128; ++i)
    for (std::uint64_t j = 0; j < 128; ++j) {
      col.push_back({AccessKind::read, (j * 128 + i) * 4, 4});
      row.push_back({AccessKind::read, (i * 128 + j) * 4, 4});
    }
  EXPECT_EQ(simulate({}, col).misses, 16384u);
  EXPECT_EQ(simulate({}, row).misses, 1024u);
  EXPECT_EQ(oracle::naive_lru_misses(32768, 64, 8, col), 16384u);
  // More ways at the same size never hurts a single-set thrash.
  std::uint64_t prev = simulate({}, col).misses;
  for (std::uint64_t ways : {16, 32, 64, 128, 256, 512}) {
    const auto m = simulate({32768, 64, ways}, col).misses;
    EXPECT_LE(m, prev) << ways;
    prev = m;
  }
}

TEST(Simulate, LineSpanningAccessTouchesTwoLines) {
  const std::vector<Access> t{{AccessKind::read, 60, 8}, {AccessKind::read, 64, 4}, {AccessKind::read, 0, 1}};
  const auto s = simulate({}, t);
  EXPECT_EQ(s.accesses, 3u);
  EXPECT_EQ(s.misses, 2u);
}

TEST(Simulate, WriteAllocates) {
  const std::vector<Access> t{{AccessKind::write, 128, 4}, {AccessKind::read, 130, 2}};
  EXPECT_EQ(simulate({}, t).misses, 1u);
}

TEST(Simulate, EvictionsCountedOnFullSets) {
  // Direct-mapped, two sets: addresses 0 and 128 share set 0.
  const CacheConfig c{128, 64, 1};
  const std::vector<Access> t{{AccessKind::read, 0, 4}, {AccessKind::read, 128, 4}, {AccessKind::read, 0, 4}};
  const auto s = simulate(c, t);
  EXPECT_EQ(s.misses, 3u);
  EXPECT_EQ(s.evictions, 2u);
}

TEST(Simulate, MatchesNaiveReference) {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 300; ++trial) {
    const std::uint64_t line = 16u << (rng() % 3);
    const std::uint64_t sets = 1u << (rng() % 4);
    const std::uint64_t ways = 1 + rng() % 4;
    const std::uint64_t size = line * sets * ways;
    const auto trace = oracle::random_trace(rng, 1000, size * (2 + rng() % 6));
    const auto s = simulate({size, line, ways}, trace);
    ASSERT_EQ(s.misses, oracle::naive_lru_misses(size, line, ways, trace)) << "trial " << trial;
    ASSERT_LE(s.evictions, s.misses);
  }
}

TEST(Simulate, FullyAssociativeMissesEqualDistinctLines) {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    const auto trace = oracle::random_trace(rng, 500, 2048);
    std::unordered_set<std::uint64_t> lines;
    for (const auto& a : trace)
      for (auto l = a.address / 64; l <= (a.address + a.size_bytes - 1) / 64; ++l) lines.insert(l);
    ASSERT_EQ(simulate({64 * 64, 64, 64}, trace).misses, lines.size());
  }
}

TEST(Simulate, CacheResetGivesColdStart) {
  Cache c;
  c.access({AccessKind::read, 0, 4});
  c.access({AccessKind::read, 0, 4});
  EXPECT_EQ(c.stats().misses, 1u);
  c.reset();
  c.access({AccessKind::read, 0, 4});
  EXPECT_EQ(c.stats().misses, 1u);
  EXPECT_EQ(c.stats().accesses, 1u);
}

TEST(TraceDump, RoundTrip) {
  std::mt19937_64 rng(6);
  const auto trace = oracle::random_trace(rng, 200, 1 << 20);
  std::stringstream ss;
  ss << "# header\n\n";
  for (const auto& a : trace) ss << format_access(a) << "\n";
  EXPECT_EQ(read_trace_dump(ss), trace);
}

TEST(TraceDump, Errors) {
  std::istringstream bad1("X 0x10 4\n"), bad2("R zz 4\n"), bad3("R 0x10 9\n");
  EXPECT_THROW(read_trace_dump(bad1), std::runtime_error);
  EXPECT_THROW(read_trace_dump(bad2), std::runtime_error);
  EXPECT_THROW(read_trace_dump(bad3), std::runtime_error);
}
