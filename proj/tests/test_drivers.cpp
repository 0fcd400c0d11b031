#include <set>

#include <gtest/gtest.h>

#include "cachegi/external_driver.hpp"
#include "cachegi/sim_driver.hpp"
#include "fixtures.hpp"

using namespace cachegi;

namespace {

PatchedSource program(const std::string& text) { return {{"p.trace", text}}; }

const TestCase kCase{"c", "seed=1", "", 0};

}  // namespace

TEST(SimDriver, UndeclaredArrayIsACompileError) {
  SimDriver d({});
  const auto c = d.compile(program("load B[0]\n"));
  EXPECT_FALSE(c.ok);
  EXPECT_NE(c.diagnostics.find("undeclared array"), std::string::npos);
}

TEST(SimDriver, ArtifactIgnoresLayoutOfSource) {
  SimDriver d({});
  const auto a = d.compile(program("array A 8 4\nload A[1]\n"));
  const auto b = d.compile(program("# note\narray  A 8 4\n\nload A[ 1 ]   # x\n"));
  ASSERT_TRUE(a.ok && b.ok);
  EXPECT_EQ(a.artifact.bytes, b.artifact.bytes);
  EXPECT_EQ(d.compile(program("array A 8 4\nload A[1]\n")).artifact.bytes, a.artifact.bytes);
}

TEST(SimDriver, SingleAccessHasMetricOne) {
  SimDriver d({});
  const auto c = d.compile(program("array A 1 4\nload A[0]\nemit acc\n"));
  const auto r = d.run(c.artifact, kCase, true);
  EXPECT_EQ(r.status, RunStatus::exited);
  EXPECT_EQ(r.metric, 1u);
  EXPECT_EQ(r.output, std::to_string(initial_cell_value(1, 0, 0)) + "\n");
  EXPECT_FALSE(d.run(c.artifact, kCase, false).metric);
}

TEST(SimDriver, AccessLimitIsATimeout) {
  SimDriverConfig cfg;
  cfg.access_limit = 100;
  SimDriver d(cfg);
  const auto over = d.compile(program("array A 200 4\nloop i 0 101\nload A[i]\nend\n"));
  EXPECT_EQ(d.run(over.artifact, kCase, true).status, RunStatus::timeout);
  const auto at = d.compile(program("array A 200 4\nloop i 0 100\nload A[i]\nend\n"));
  EXPECT_EQ(d.run(at.artifact, kCase, true).status, RunStatus::exited);
}

TEST(SimDriver, RuntimeFaultsExitNonZero) {
  SimDriver d({});
  const auto c = d.compile(program("array A 2 4\nload A[5]\n"));
  const auto r = d.run(c.artifact, kCase, true);
  EXPECT_EQ(r.status, RunStatus::exited);
  EXPECT_EQ(r.exit_status, 1);
  EXPECT_FALSE(r.metric);
  const auto bad_input = d.run(c.artifact, {"x", "seed", "", 0}, false);
  EXPECT_EQ(bad_input.status, RunStatus::fault);
}

TEST(SimDriver, NoiseStaysWithinAmplitudeAndIsSeeded) {
  const auto measure = [](std::uint64_t seed) {
    SimDriverConfig cfg;
    cfg.noise = NoiseConfig{seed, 0.05, {}};
    SimDriver d(cfg);
    const auto c = d.compile(program("array A 4000 4\nloop i 0 4000\nload A[i]\nend\n"));
    std::vector<std::uint64_t> v;
    for (int k = 0; k < 200; ++k) v.push_back(*d.run(c.artifact, kCase, true).metric);
    return v;
  };
  const auto a = measure(1);
  EXPECT_EQ(a, measure(1));
  EXPECT_NE(a, measure(2));
  std::set<std::uint64_t> distinct(a.begin(), a.end());
  EXPECT_GT(distinct.size(), 10u);
  for (auto m : a) {
    EXPECT_GE(m, 238u);  // 250 * 0.95
    EXPECT_LE(m, 263u);  // 250 * 1.05
  }
}

TEST(SimDriver, DriftFollowsClock) {
  SimDriverConfig cfg;
  cfg.noise = NoiseConfig{1, 0.0, {{10, 1.5}, {20, 2.0}}};
  SimDriver d(cfg);
  const auto c = d.compile(program("array A 1600 4\nloop i 0 1600\nload A[i]\nend\n"));
  d.set_clock(9);
  EXPECT_EQ(d.run(c.artifact, kCase, true).metric, 100u);
  d.set_clock(10);
  EXPECT_EQ(d.run(c.artifact, kCase, true).metric, 150u);
  d.set_clock(25);
  EXPECT_EQ(d.run(c.artifact, kCase, true).metric, 200u);
  // Outputs are never perturbed.
  EXPECT_EQ(d.run(c.artifact, kCase, false).output, "");
}

TEST(CounterOutput, PerfCsv) {
  EXPECT_EQ(parse_counter_output("40000,,L1-dcache-load-misses,1000,100.00,,\n", CounterFormat::perf_csv,
                                 "L1-dcache-load-misses"),
            40000u);
  EXPECT_EQ(parse_counter_output("# started\n\n7,,cycles,,\n12,,L1-dcache-load-misses:u,1,100,,\n",
                                 CounterFormat::perf_csv, "L1-dcache-load-misses"),
            12u);
  EXPECT_THROW(parse_counter_output("7,,cycles,,\n", CounterFormat::perf_csv, "L1-dcache-load-misses"),
               CounterParseError);
  EXPECT_THROW(parse_counter_output("<not counted>,,L1-dcache-load-misses,0,0.00,,\n", CounterFormat::perf_csv,
                                    "L1-dcache-load-misses"),
               CounterParseError);
}

TEST(CounterOutput, KeyValue) {
  EXPECT_EQ(parse_counter_output("cycles=5\nl1d_misses = 123\n", CounterFormat::key_value_file, "l1d_misses"), 123u);
  EXPECT_THROW(parse_counter_output("l1d_misses=-1\n", CounterFormat::key_value_file, "l1d_misses"),
               CounterParseError);
  EXPECT_THROW(parse_counter_output("", CounterFormat::key_value_file, "l1d_misses"), CounterParseError);
  EXPECT_EQ(parse_counter_format("key_value_file"), CounterFormat::key_value_file);
  EXPECT_THROW(parse_counter_format("xml"), std::invalid_argument);
}

TEST(Substitute, ReplacesEveryPlaceholder) {
  EXPECT_EQ(substitute("{a} {b} {a}", {{"a", "x{b}"}, {"b", "y"}}), "xy y xy");
  EXPECT_EQ(substitute("none", {{"a", "x"}}), "none");
}

class ExternalDriverTest : public ::testing::Test {
 protected:
  fixture::TempDir dir;

  ExternalDriverConfig config(std::string compile, std::string run) {
    ExternalDriverConfig c;
    c.compile_cmd = std::move(compile);
    c.run_cmd = std::move(run);
    c.counter_format = CounterFormat::key_value_file;
    c.metric_name = "l1d_misses";
    c.work_dir = dir / "work";
    c.compile_timeout_ms = 5000;
    c.timeout_ms = 2000;
    return c;
  }
};

TEST_F(ExternalDriverTest, CompileFailureKeepsFirstDiagnostic) {
  ExternalDriver d(config("echo 'p.c:3: error: bad' >&2; echo 'second' >&2; exit 1", "true"));
  const auto c = d.compile({{"p.c", "x\n"}});
  EXPECT_FALSE(c.ok);
  EXPECT_EQ(c.diagnostics, "p.c:3: error: bad");
}

TEST_F(ExternalDriverTest, MissingArtifactIsACompileError) {
  ExternalDriver d(config("true", "true"));
  EXPECT_FALSE(d.compile({{"p.c", "x\n"}}).ok);
}

TEST_F(ExternalDriverTest, CompilesRunsAndReadsCounters) {
  ExternalDriver d(config("cp {src_dir}/p.c {artifact}",
                          "cat {artifact}; tr a-z A-Z; echo \"l1d_misses=$(wc -c < {input})\" > {counters}"));
  const auto c = d.compile({{"src/p.c", "body\n"}});
  ASSERT_TRUE(c.ok) << c.diagnostics;
  EXPECT_EQ(c.artifact.bytes, "body\n");
  const auto r = d.run(c.artifact, {"t1", "hello", "", 0}, true);
  EXPECT_EQ(r.status, RunStatus::exited);
  EXPECT_EQ(r.output, "body\nHELLO");
  EXPECT_EQ(r.metric, 5u);
}

TEST_F(ExternalDriverTest, CountersFallBackToStderr) {
  auto cfg = config("cp {src_dir}/p.c {artifact}", "echo '9,,L1-dcache-load-misses,,' >&2");
  cfg.counter_format = CounterFormat::perf_csv;
  cfg.metric_name = "L1-dcache-load-misses";
  ExternalDriver d(cfg);
  const auto c = d.compile({{"p.c", "x"}});
  EXPECT_EQ(d.run(c.artifact, kCase, true).metric, 9u);
  auto missing = config("cp {src_dir}/p.c {artifact}", "true");
  ExternalDriver d2(missing);
  const auto c2 = d2.compile({{"p.c", "x"}});
  EXPECT_EQ(d2.run(c2.artifact, kCase, true).status, RunStatus::fault);
}

TEST_F(ExternalDriverTest, FreshScratchDirectoryPerCandidate) {
  ExternalDriver d(config("ls > {artifact}", "true"));
  d.set_clock(4);
  const auto a = d.compile({{"p.c", "x"}});
  const auto b = d.compile({{"p.c", "y"}});
  ASSERT_TRUE(a.ok && b.ok);
  EXPECT_NE(a.artifact.path.parent_path(), b.artifact.path.parent_path());
  EXPECT_EQ(a.artifact.path.parent_path().filename(), "4");
  EXPECT_EQ(b.artifact.path.parent_path().filename(), "4_1");
  // Only the sources were present when the compile command ran.
  EXPECT_EQ(a.artifact.bytes, "artifact\nsrc\n");
}

TEST_F(ExternalDriverTest, ExitStatusAndTimeout) {
  ExternalDriver d(config("cp {src_dir}/p.c {artifact}", "exit 3"));
  const auto c = d.compile({{"p.c", "x"}});
  const auto r = d.run(c.artifact, kCase, false);
  EXPECT_EQ(r.status, RunStatus::exited);
  EXPECT_EQ(r.exit_status, 3);
  auto slow = config("cp {src_dir}/p.c {artifact}", "sleep 5");
  slow.timeout_ms = 200;
  ExternalDriver d2(slow);
  const auto c2 = d2.compile({{"p.c", "x"}});
  EXPECT_EQ(d2.run(c2.artifact, kCase, false).status, RunStatus::timeout);
}

TEST_F(ExternalDriverTest, EnvironmentIsFiltered) {
  setenv("CACHEGI_SECRET", "leak", 1);
  ExternalDriver d(config("cp {src_dir}/p.c {artifact}", "echo \"[$CACHEGI_SECRET][$CACHEGI_THRASH_BYTES]\""));
  const auto c = d.compile({{"p.c", "x"}});
  EXPECT_EQ(d.run(c.artifact, kCase, false).output, "[][32768]\n");
  unsetenv("CACHEGI_SECRET");
}
