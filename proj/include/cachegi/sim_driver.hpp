#pragma once

// Deterministic driver: "compiling" parses the trace program and "running"
// interprets it against a cold simulated L1 data cache. Optional seeded
// noise reproduces the jitter and drift of real counter measurements.

#include <cmath>
#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "cachegi/cachesim.hpp"
#include "cachegi/driver.hpp"
#include "cachegi/operators.hpp"
#include "cachegi/trace_dsl.hpp"

namespace cachegi {

struct DriftStep {
  std::int64_t step = 0;
  double multiplier = 1.0;
};

struct NoiseConfig {
  std::uint64_t seed = 0;
  double amplitude = 0.0;  // each sample scaled by 1 + amplitude * U(-1, 1)
  std::vector<DriftStep> drift_schedule;  // multiplier in force from `step` on
};

struct SimDriverConfig {
  CacheConfig cache;
  std::uint64_t access_limit = 10'000'000;
  std::optional<NoiseConfig> noise;
};

class SimDriver final : public Driver {
 public:
  explicit SimDriver(SimDriverConfig cfg) : cfg_(std::move(cfg)), noise_rng_(cfg_.noise ? cfg_.noise->seed : 0) {
    cfg_.cache.validate();
  }

  const SimDriverConfig& config() const noexcept { return cfg_; }

  CompileResult compile(const PatchedSource& source) override {
    std::string text;
    for (const auto& f : source) text += f.text;
    CompileResult r;
    try {
      const auto prog = parse_trace_program(text);
      r.ok = true;
      r.artifact.bytes = prog.canonical();
    } catch (const TraceParseError& e) {
      r.diagnostics = e.what();
    }
    return r;
  }

  RunResult run(const Artifact& artifact, const TestCase& test, bool collect_metric) override {
    RunResult r = run_clean(artifact, test);
    if (!collect_metric || r.status != RunStatus::exited || !r.metric) {
      if (!collect_metric) r.metric.reset();
      return r;
    }
    if (cfg_.noise) r.metric = perturb(*r.metric);
    return r;
  }

  void set_clock(std::int64_t step) override { clock_ = step; }

  /// Drift multiplier in force at the current clock.
  double drift_multiplier() const {
    double m = 1.0;
    if (!cfg_.noise) return m;
    for (const auto& d : cfg_.noise->drift_schedule)
      if (clock_ >= d.step) m = d.multiplier;
    return m;
  }

 private:
  // Noise-free outcome. Runs are pure in (artifact, input), so results are
  // memoized.
  RunResult run_clean(const Artifact& artifact, const TestCase& test) {
    std::string key = artifact.bytes;
    key.push_back('\0');
    key += test.input;
    if (auto it = memo_.find(key); it != memo_.end()) return it->second;

    RunResult r;
    try {
      if (!program_ || program_->first != artifact.bytes)
        program_ = std::make_unique<std::pair<std::string, TraceProgram>>(artifact.bytes, parse_trace_program(artifact.bytes));
      const Bindings bindings = parse_bindings(test.input);
      Cache cache(cfg_.cache);
      std::vector<std::int64_t> emitted;
      try {
        emitted = execute_trace_program(program_->second, bindings, TraceLimits{cfg_.access_limit},
                                        [&](const Access& a) { cache.access(a); });
        r.exit_status = 0;
        r.metric = cache.stats().misses;
      } catch (const TraceRuntimeError& e) {
        if (e.fault() == TraceFault::access_limit) {
          r.status = RunStatus::timeout;
        } else {
          r.exit_status = 1;
        }
        r.detail = e.what();
      }
      for (auto v : emitted) r.output += std::to_string(v) + "\n";
    } catch (const TraceParseError& e) {
      r.status = RunStatus::fault;
      r.detail = std::string("artifact does not parse: ") + e.what();
    } catch (const std::invalid_argument& e) {
      r.status = RunStatus::fault;
      r.detail = std::string("bad test input: ") + e.what();
    }
    if (memo_.size() >= kMemoLimit) memo_.clear();
    memo_.emplace(std::move(key), r);
    return r;
  }

  std::uint64_t perturb(std::uint64_t misses) {
    const auto& n = *cfg_.noise;
    const double jitter = 1.0 + n.amplitude * (2.0 * noise_rng_.unit() - 1.0);
    const double v = static_cast<double>(misses) * drift_multiplier() * jitter;
    return v <= 0 ? 0 : static_cast<std::uint64_t>(std::llround(v));
  }

  static constexpr std::size_t kMemoLimit = 4096;

  SimDriverConfig cfg_;
  RngHandle noise_rng_;
  std::int64_t clock_ = 0;
  std::unique_ptr<std::pair<std::string, TraceProgram>> program_;
  std::unordered_map<std::string, RunResult> memo_;
};

}  // namespace cachegi
