#pragma once

// Measurement backend interface shared by the external-command and
// simulator drivers.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "cachegi/source_model.hpp"
#include "cachegi/test_suite.hpp"

namespace cachegi {

/// Compiled form of a candidate. `bytes` feed the tabu comparison; `path`
/// locates the file for drivers that execute it.
struct Artifact {
  std::string bytes;
  std::filesystem::path path;
};

struct CompileResult {
  bool ok = false;
  Artifact artifact;
  std::string diagnostics;
};

enum class RunStatus {
  exited,   // ran to completion (possibly with a non-zero exit status)
  timeout,  // wall-clock or access budget exceeded
  fault,    // the driver could not produce a result (launch, counter parse)
};

struct RunResult {
  RunStatus status = RunStatus::exited;
  std::string output;
  int exit_status = 0;
  std::optional<std::uint64_t> metric;
  std::string detail;
};

class Driver {
 public:
  virtual ~Driver() = default;

  virtual CompileResult compile(const PatchedSource& source) = 0;
  virtual RunResult run(const Artifact& artifact, const TestCase& test, bool collect_metric) = 0;

  /// Search step about to be evaluated; lets time-dependent drivers
  /// (noise injection, scratch naming) follow the search clock.
  virtual void set_clock(std::int64_t /*step*/) {}
};

}  // namespace cachegi
