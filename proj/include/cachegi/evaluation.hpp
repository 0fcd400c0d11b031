#pragma once

// Fitness of one candidate, decided by four gates in priority order:
//   1. it compiles (then the tabu check on the compiled artifact),
//   2. every test case runs without crashing or timing out,
//   3. every test case reproduces the original output and exit status,
//   4. the L1 data-cache miss count, re-measured `repeats` times per case.
// The first failing gate ends the evaluation.

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cachegi/driver.hpp"
#include "cachegi/source_model.hpp"
#include "cachegi/stats.hpp"
#include "cachegi/tabu.hpp"
#include "cachegi/test_suite.hpp"

namespace cachegi {

enum class GateStatus { compile_error, tabu_duplicate, run_error, timeout, output_mismatch, ok };

inline constexpr GateStatus kAllGateStatuses[] = {GateStatus::compile_error, GateStatus::tabu_duplicate,
                                                  GateStatus::run_error,     GateStatus::timeout,
                                                  GateStatus::output_mismatch, GateStatus::ok};

inline std::string_view to_string(GateStatus s) {
  switch (s) {
    case GateStatus::compile_error: return "compile_error";
    case GateStatus::tabu_duplicate: return "tabu_duplicate";
    case GateStatus::run_error: return "run_error";
    case GateStatus::timeout: return "timeout";
    case GateStatus::output_mismatch: return "output_mismatch";
    case GateStatus::ok: return "ok";
  }
  return "?";
}

inline GateStatus parse_gate_status(std::string_view s) {
  for (auto g : kAllGateStatuses)
    if (to_string(g) == s) return g;
  throw std::invalid_argument("unknown gate status '" + std::string(s) + "'");
}

struct GateOutcome {
  GateStatus status = GateStatus::ok;
  std::size_t test_index = 0;  // 1-based failing case, 0 if none
  std::string detail;

  bool ok() const noexcept { return status == GateStatus::ok; }
};

struct FitnessRecord {
  GateOutcome outcome;
  std::vector<std::vector<double>> metric_samples;  // per case, one per repeat
  double summarized_metric = 0;                      // sum over cases of Q1
  std::optional<double> relative_fitness;            // summarized / baseline

  bool ok() const noexcept { return outcome.ok(); }
};

struct EvaluationOptions {
  std::size_t repeats = 11;
  std::optional<double> baseline;
  TabuStore* tabu = nullptr;
};

/// Summary of repeated measurements of one case: the nearest-rank Q1.
inline double summarize_metric(std::span<const double> samples) { return quartile1(samples); }

inline FitnessRecord evaluate(const PatchedSource& source, std::span<const TestCase> suite, Driver& driver,
                              const EvaluationOptions& opt) {
  if (opt.repeats < 1) throw std::invalid_argument("evaluate: repeats must be >= 1");
  if (suite.empty()) throw std::invalid_argument("evaluate: empty test suite");
  FitnessRecord rec;
  auto fail = [&](GateStatus s, std::size_t index, std::string detail) {
    rec.outcome = {s, index, std::move(detail)};
    return rec;
  };

  const CompileResult compiled = driver.compile(source);
  if (!compiled.ok) return fail(GateStatus::compile_error, 0, compiled.diagnostics);
  if (opt.tabu && opt.tabu->register_artifact(compiled.artifact.bytes) == TabuVerdict::duplicate)
    return fail(GateStatus::tabu_duplicate, 0, "artifact identical to an earlier candidate");

  for (std::size_t i = 0; i < suite.size(); ++i) {
    const TestCase& tc = suite[i];
    const RunResult r = driver.run(compiled.artifact, tc, false);
    if (r.status == RunStatus::timeout) return fail(GateStatus::timeout, i + 1, r.detail);
    if (r.status == RunStatus::fault) return fail(GateStatus::run_error, i + 1, r.detail);
    if (r.exit_status != tc.expected_exit) {
      if (tc.expected_exit == 0)
        return fail(GateStatus::run_error, i + 1,
                    "exit status " + std::to_string(r.exit_status) + (r.detail.empty() ? "" : ": " + r.detail));
      return fail(GateStatus::output_mismatch, i + 1,
                  "exit status " + std::to_string(r.exit_status) + ", expected " + std::to_string(tc.expected_exit));
    }
    if (r.output != tc.expected_output) return fail(GateStatus::output_mismatch, i + 1, "output differs");
  }

  rec.metric_samples.resize(suite.size());
  for (std::size_t i = 0; i < suite.size(); ++i) {
    auto& samples = rec.metric_samples[i];
    samples.reserve(opt.repeats);
    for (std::size_t k = 0; k < opt.repeats; ++k) {
      const RunResult r = driver.run(compiled.artifact, suite[i], true);
      if (r.status == RunStatus::timeout) {
        rec.metric_samples.clear();
        return fail(GateStatus::timeout, i + 1, r.detail);
      }
      if (r.status != RunStatus::exited || !r.metric) {
        rec.metric_samples.clear();
        return fail(GateStatus::run_error, i + 1, r.detail.empty() ? "no metric reported" : r.detail);
      }
      samples.push_back(static_cast<double>(*r.metric));
    }
    rec.summarized_metric += summarize_metric(samples);
  }
  if (opt.baseline) rec.relative_fitness = rec.summarized_metric / *opt.baseline;
  return rec;
}

enum class FitnessOrder { a_better, b_better, equal };

/// Any success beats any failure; failures are mutually unranked; successes
/// compare by relative fitness (lower is better).
inline FitnessOrder compare_fitness(const FitnessRecord& a, const FitnessRecord& b) {
  if (a.ok() != b.ok()) return a.ok() ? FitnessOrder::a_better : FitnessOrder::b_better;
  if (!a.ok()) return FitnessOrder::equal;
  const double fa = a.relative_fitness.value_or(a.summarized_metric);
  const double fb = b.relative_fitness.value_or(b.summarized_metric);
  if (fa < fb) return FitnessOrder::a_better;
  if (fb < fa) return FitnessOrder::b_better;
  return FitnessOrder::equal;
}

class TargetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Compiles the original program and fills in any missing expectations by
/// running it on each case.
inline std::vector<TestCase> record_expectations(const PatchedSource& original, const std::vector<TestCaseSpec>& specs,
                                                 Driver& driver) {
  std::vector<TestCase> out;
  out.reserve(specs.size());
  std::optional<CompileResult> compiled;
  for (const auto& s : specs) {
    TestCase tc{s.id, s.input, s.expected_output.value_or(""), s.expected_exit.value_or(0)};
    if (!s.expected_output || !s.expected_exit) {
      if (!compiled) {
        compiled = driver.compile(original);
        if (!compiled->ok) throw TargetError("original program does not compile: " + compiled->diagnostics);
      }
      const RunResult r = driver.run(compiled->artifact, tc, false);
      if (r.status != RunStatus::exited)
        throw TargetError("original program failed on case '" + s.id + "': " + r.detail);
      if (!s.expected_output) tc.expected_output = r.output;
      if (!s.expected_exit) tc.expected_exit = r.exit_status;
    }
    out.push_back(std::move(tc));
  }
  return out;
}

}  // namespace cachegi
