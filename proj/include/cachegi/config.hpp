#pragma once

// Run configuration, read from a JSON file. Relative paths are resolved
// against the directory holding the config file.
//
// {
//   "target":   {"paths": ["prog.trace"], "strip_policy": "comments_and_blank"},
//   "driver":   {"kind": "sim", "sim": {...}} | {"kind": "external", "external": {...}},
//   "suite":    "train.json",
//   "holdout":  "holdout.json",
//   "search":   {"budget_steps": 0, "confidence": 0.99, "seed": 7, ...},
//   "operators": {"weights": [1, 1, 1]},
//   "output_dir": "out"
// }

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cachegi/external_driver.hpp"
#include "cachegi/search_engine.hpp"
#include "cachegi/sim_driver.hpp"
#include "cachegi/source_model.hpp"
#include "cachegi/test_suite.hpp"

namespace cachegi {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DriverKind { sim, external };

struct RunConfig {
  std::filesystem::path base_dir;
  std::vector<std::string> target_paths;  // as written in the config
  StripPolicy strip_policy = StripPolicy::comments_and_blank;
  DriverKind driver_kind = DriverKind::sim;
  SimDriverConfig sim;
  ExternalDriverConfig external;
  std::filesystem::path suite;
  std::optional<std::filesystem::path> holdout;
  SearchConfig search;
  std::filesystem::path output_dir;

  std::filesystem::path resolve(const std::filesystem::path& p) const { return p.is_absolute() ? p : base_dir / p; }
};

namespace detail {

template <typename T>
void read_opt(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline SimDriverConfig parse_sim_config(const nlohmann::json& j) {
  SimDriverConfig c;
  if (j.contains("cache")) {
    const auto& cj = j["cache"];
    read_opt(cj, "size_bytes", c.cache.size_bytes);
    read_opt(cj, "line_bytes", c.cache.line_bytes);
    read_opt(cj, "associativity", c.cache.associativity);
  }
  read_opt(j, "access_limit", c.access_limit);
  if (j.contains("noise") && !j["noise"].is_null()) {
    const auto& nj = j["noise"];
    NoiseConfig n;
    read_opt(nj, "seed", n.seed);
    read_opt(nj, "amplitude", n.amplitude);
    if (nj.contains("drift_schedule"))
      for (const auto& d : nj["drift_schedule"]) n.drift_schedule.push_back({d.at("step").get<std::int64_t>(), d.at("multiplier").get<double>()});
    if (!(n.amplitude >= 0 && n.amplitude < 1)) throw ConfigError("driver.sim.noise.amplitude must be in [0, 1)");
    c.noise = n;
  }
  if (c.access_limit < 1) throw ConfigError("driver.sim.access_limit must be >= 1");
  try {
    c.cache.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("driver.sim.cache: ") + e.what());
  }
  return c;
}

inline ExternalDriverConfig parse_external_config(const nlohmann::json& j, const std::filesystem::path& base) {
  ExternalDriverConfig c;
  read_opt(j, "compile_cmd", c.compile_cmd);
  read_opt(j, "run_cmd", c.run_cmd);
  read_opt(j, "metric_name", c.metric_name);
  if (j.contains("counter_format")) c.counter_format = parse_counter_format(j["counter_format"].get<std::string>());
  read_opt(j, "compile_timeout_ms", c.compile_timeout_ms);
  read_opt(j, "timeout_ms", c.timeout_ms);
  read_opt(j, "cache_thrash", c.cache_thrash);
  std::string work = "work";
  read_opt(j, "work_dir", work);
  c.work_dir = std::filesystem::path(work).is_absolute() ? std::filesystem::path(work) : base / work;
  read_opt(j, "env_allow", c.env_allow);
  if (c.compile_cmd.empty() || c.run_cmd.empty())
    throw ConfigError("driver.external needs compile_cmd and run_cmd");
  if (c.timeout_ms < 1 || c.compile_timeout_ms < 1) throw ConfigError("driver.external timeouts must be >= 1 ms");
  return c;
}

inline SearchConfig parse_search_config(const nlohmann::json& j) {
  SearchConfig s;
  read_opt(j, "budget_steps", s.budget_steps);
  read_opt(j, "confidence", s.confidence);
  read_opt(j, "warmup_count", s.warmup_count);
  read_opt(j, "repeats", s.repeats);
  read_opt(j, "seed", s.seed);
  read_opt(j, "restart_after", s.restart_after);
  read_opt(j, "sentinel_every", s.sentinel_every);
  read_opt(j, "drift_tolerance", s.drift_tolerance);
  read_opt(j, "rebaseline", s.rebaseline_on_drift);
  read_opt(j, "minify_slack", s.minify_slack);
  return s;
}

}  // namespace detail

inline RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  c.base_dir = base_dir;
  try {
    const auto& t = j.at("target");
    c.target_paths = t.at("paths").get<std::vector<std::string>>();
    if (c.target_paths.empty()) throw ConfigError("target.paths is empty");
    if (t.contains("strip_policy")) c.strip_policy = parse_strip_policy(t["strip_policy"].get<std::string>());

    const auto& d = j.at("driver");
    const auto kind = d.at("kind").get<std::string>();
    if (kind == "sim") {
      c.driver_kind = DriverKind::sim;
      c.sim = detail::parse_sim_config(d.value("sim", nlohmann::json::object()));
    } else if (kind == "external") {
      c.driver_kind = DriverKind::external;
      c.external = detail::parse_external_config(d.at("external"), base_dir);
    } else {
      throw ConfigError("driver.kind must be 'sim' or 'external', got '" + kind + "'");
    }

    c.suite = c.resolve(j.at("suite").get<std::string>());
    if (j.contains("holdout") && !j["holdout"].is_null()) c.holdout = c.resolve(j["holdout"].get<std::string>());
    if (j.contains("search")) c.search = detail::parse_search_config(j["search"]);
    if (j.contains("operators") && j["operators"].contains("weights")) {
      const auto w = j["operators"]["weights"].get<std::vector<double>>();
      if (w.size() != 3) throw ConfigError("operators.weights needs three values (deletion, insertion, replacement)");
      c.search.weights.kind = {w[0], w[1], w[2]};
    }
    c.output_dir = c.resolve(j.value("output_dir", std::string("out")));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("config: ") + e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }
  try {
    c.search.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  for (const auto& p : c.target_paths)
    if (!std::filesystem::exists(c.resolve(p))) throw ConfigError("target file not found: " + c.resolve(p).string());
  if (!std::filesystem::exists(c.suite)) throw ConfigError("suite file not found: " + c.suite.string());
  if (c.holdout && !std::filesystem::exists(*c.holdout))
    throw ConfigError("holdout file not found: " + c.holdout->string());
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return parse_run_config(j, std::filesystem::absolute(path).parent_path());
}

/// Reads the target files. Files keep the names written in the config so
/// that multi-file patch text stays independent of the working directory.
inline SourceRoster load_roster(const RunConfig& c) {
  std::vector<std::pair<std::string, std::string>> sources;
  for (const auto& p : c.target_paths) {
    std::ifstream in(c.resolve(p), std::ios::binary);
    if (!in) throw SourceError("cannot read source file '" + c.resolve(p).string() + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    sources.emplace_back(p, buf.str());
  }
  return roster_from_text(sources, c.strip_policy);
}

inline std::unique_ptr<Driver> make_driver(const RunConfig& c) {
  if (c.driver_kind == DriverKind::sim) return std::make_unique<SimDriver>(c.sim);
  return std::make_unique<ExternalDriver>(c.external);
}

}  // namespace cachegi
