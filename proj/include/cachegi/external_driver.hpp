#pragma once

// Driver wrapping a real build / run / hardware-counter pipeline through
// shell command templates.
//
//   compile_cmd  placeholders {src_dir} {artifact}
//   run_cmd      placeholders {artifact} {input} {counters}
//
// Each candidate gets a fresh scratch directory `work/<n>/`. The run
// command must leave counter output in {counters} (e.g. `perf stat -x,
// -o {counters}`); stderr is parsed when that file is absent.

#include <cctype>
#include <charconv>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "cachegi/driver.hpp"
#include "cachegi/subprocess.hpp"
#include "cachegi/text_util.hpp"

namespace cachegi {

enum class CounterFormat { perf_csv, key_value_file };

inline CounterFormat parse_counter_format(std::string_view s) {
  if (s == "perf_csv") return CounterFormat::perf_csv;
  if (s == "key_value_file") return CounterFormat::key_value_file;
  throw std::invalid_argument("unknown counter format '" + std::string(s) + "'");
}

class CounterParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Extracts `metric_name` from counter-tool output: perf's CSV mode
/// (`value,unit,event,...` per line) or `name=value` lines.
inline std::uint64_t parse_counter_output(std::string_view text, CounterFormat format, std::string_view metric_name) {
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    const std::string_view line = detail::trim(text.substr(start, nl - start));
    start = nl + 1;
    if (line.empty() || line.front() == '#') continue;

    std::string_view value, event;
    if (format == CounterFormat::key_value_file) {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) continue;
      event = detail::trim(line.substr(0, eq));
      value = detail::trim(line.substr(eq + 1));
    } else {
      std::vector<std::string_view> fields;
      std::size_t f = 0;
      for (;;) {
        const auto c = line.find(',', f);
        fields.push_back(line.substr(f, c == std::string_view::npos ? std::string_view::npos : c - f));
        if (c == std::string_view::npos) break;
        f = c + 1;
      }
      if (fields.size() < 3) continue;
      event = detail::trim(fields[2]);
      value = detail::trim(fields[0]);
      // perf appends privilege modifiers such as ":u".
      if (event != metric_name && event.starts_with(metric_name) && event.size() > metric_name.size() &&
          event[metric_name.size()] == ':')
        event = metric_name;
    }
    if (event != metric_name) continue;
    std::uint64_t v = 0;
    const auto [p, ec] = std::from_chars(value.data(), value.data() + value.size(), v);
    if (ec != std::errc() || p != value.data() + value.size())
      throw CounterParseError("counter '" + std::string(metric_name) + "' has unusable value '" + std::string(value) + "'");
    return v;
  }
  throw CounterParseError("counter '" + std::string(metric_name) + "' not found in output");
}

struct ExternalDriverConfig {
  std::string compile_cmd;
  std::string run_cmd;
  std::string metric_name = "L1-dcache-load-misses";
  CounterFormat counter_format = CounterFormat::perf_csv;
  std::int64_t compile_timeout_ms = 120'000;
  std::int64_t timeout_ms = 10'000;
  // Exports CACHEGI_THRASH_BYTES=32768 so a harness can clear L1D (see
  // thrash.hpp) right before the measured region.
  bool cache_thrash = true;
  std::filesystem::path work_dir = "work";
  std::vector<std::string> env_allow{"PATH", "HOME", "LANG", "TMPDIR"};
};

inline std::string substitute(std::string templ, const std::vector<std::pair<std::string, std::string>>& values) {
  for (const auto& [key, value] : values) {
    const std::string token = "{" + key + "}";
    for (auto pos = templ.find(token); pos != std::string::npos; pos = templ.find(token, pos + value.size()))
      templ.replace(pos, token.size(), value);
  }
  return templ;
}

class ExternalDriver final : public Driver {
 public:
  explicit ExternalDriver(ExternalDriverConfig cfg) : cfg_(std::move(cfg)) {
    if (cfg_.compile_cmd.empty() || cfg_.run_cmd.empty())
      throw std::invalid_argument("external driver needs compile_cmd and run_cmd");
  }

  CompileResult compile(const PatchedSource& source) override {
    const auto dir = fresh_dir();
    const auto src_dir = dir / "src";
    write_patched_source(source, src_dir);
    const auto artifact = dir / "artifact";
    const auto cmd = substitute(cfg_.compile_cmd, {{"src_dir", src_dir.string()}, {"artifact", artifact.string()}});
    const auto pr = run_process(cmd, dir, std::chrono::milliseconds(cfg_.compile_timeout_ms), environment());

    CompileResult r;
    if (pr.timed_out) {
      r.diagnostics = "timeout";
      return r;
    }
    if (pr.exit_status != 0) {
      r.diagnostics = first_diagnostic(pr.err.empty() ? pr.out : pr.err);
      if (r.diagnostics.empty()) r.diagnostics = "compiler exited with status " + std::to_string(pr.exit_status);
      return r;
    }
    std::ifstream in(artifact, std::ios::binary);
    if (!in) {
      r.diagnostics = "compile command produced no artifact at " + artifact.string();
      return r;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    r.ok = true;
    r.artifact.bytes = buf.str();
    r.artifact.path = artifact;
    return r;
  }

  RunResult run(const Artifact& artifact, const TestCase& test, bool collect_metric) override {
    const auto dir = artifact.path.parent_path();
    const auto input = dir / ("input_" + sanitize(test.id));
    {
      std::ofstream out(input, std::ios::binary);
      out << test.input;
    }
    const auto counters = dir / ("counters_" + std::to_string(run_seq_++));
    std::filesystem::remove(counters);
    const auto cmd = substitute(cfg_.run_cmd, {{"artifact", artifact.path.string()},
                                               {"input", input.string()},
                                               {"counters", counters.string()}});
    const auto pr = run_process(cmd, dir, std::chrono::milliseconds(cfg_.timeout_ms), environment(), test.input);

    RunResult r;
    r.output = pr.out;
    r.exit_status = pr.exit_status;
    if (pr.timed_out) {
      r.status = RunStatus::timeout;
      r.detail = "exceeded " + std::to_string(cfg_.timeout_ms) + " ms";
      return r;
    }
    if (collect_metric) {
      std::string text = pr.err;
      if (std::ifstream in(counters, std::ios::binary); in) {
        std::ostringstream buf;
        buf << in.rdbuf();
        text = buf.str();
      }
      try {
        r.metric = parse_counter_output(text, cfg_.counter_format, cfg_.metric_name);
      } catch (const CounterParseError& e) {
        r.status = RunStatus::fault;
        r.detail = std::string("counter parse: ") + e.what();
      }
    }
    return r;
  }

  void set_clock(std::int64_t step) override { step_ = step; }

 private:
  std::filesystem::path fresh_dir() {
    std::filesystem::path dir;
    do {
      dir = cfg_.work_dir / (std::to_string(step_) + (seq_ ? "_" + std::to_string(seq_) : std::string()));
      ++seq_;
    } while (std::filesystem::exists(dir));
    seq_ = 0;
    std::filesystem::create_directories(dir);
    return dir;
  }

  std::vector<std::string> environment() const {
    auto env = allowed_environment(cfg_.env_allow);
    if (cfg_.cache_thrash) env.emplace_back("CACHEGI_THRASH_BYTES=32768");
    return env;
  }

  static std::string first_diagnostic(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line))
      if (!detail::trim(line).empty()) return std::string(detail::trim(line));
    return {};
  }

  static std::string sanitize(const std::string& id) {
    std::string s = id;
    for (char& c : s)
      if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_')) c = '_';
    return s;
  }

  ExternalDriverConfig cfg_;
  std::int64_t step_ = 0;
  std::size_t seq_ = 0;
  std::uint64_t run_seq_ = 0;
};

}  // namespace cachegi
