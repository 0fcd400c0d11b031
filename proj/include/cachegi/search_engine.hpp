#pragma once

// Warm-up, budgeted first-improvement local search with tabu deduplication
// and sentinel drift probes, and greedy patch minification.

#include <chrono>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cachegi/driver.hpp"
#include "cachegi/evaluation.hpp"
#include "cachegi/operators.hpp"
#include "cachegi/source_model.hpp"
#include "cachegi/stats.hpp"
#include "cachegi/tabu.hpp"

namespace cachegi {

/// Draws needed so that N equally likely lines are all sampled with
/// probability p, from the asymptotic law P = exp(-N e^(-t/N)):
/// t = ceil(N ln(N / ln(1/p))), at least N.
inline std::int64_t coupon_budget(std::int64_t n, double p) {
  if (n < 1) throw std::invalid_argument("coupon_budget: N must be >= 1");
  if (!(p > 0.0 && p < 1.0)) throw std::invalid_argument("coupon_budget: confidence must be in (0, 1)");
  const double nd = static_cast<double>(n);
  const double t = std::ceil(nd * std::log(nd / std::log(1.0 / p)));
  return std::max<std::int64_t>(n, static_cast<std::int64_t>(t));
}

struct SearchConfig {
  std::int64_t budget_steps = 0;  // 0: derive from coupon_budget(lines, confidence)
  double confidence = 0.99;
  std::size_t warmup_count = 11;
  std::size_t repeats = 11;
  std::uint64_t seed = 0;
  std::int64_t restart_after = 100;
  std::int64_t sentinel_every = 50;  // 0 disables sentinel probes
  double drift_tolerance = 0.05;
  bool rebaseline_on_drift = false;
  double minify_slack = 0.0;
  OperatorWeights weights;

  void validate() const {
    if (budget_steps < 0) throw std::invalid_argument("search.budget_steps must be >= 1 (or 0 to derive it)");
    if (!(confidence > 0 && confidence < 1)) throw std::invalid_argument("search.confidence must be in (0, 1)");
    if (warmup_count < 1) throw std::invalid_argument("search.warmup_count must be >= 1");
    if (repeats < 1) throw std::invalid_argument("search.repeats must be >= 1");
    if (restart_after < 1) throw std::invalid_argument("search.restart_after must be >= 1");
    if (sentinel_every < 0) throw std::invalid_argument("search.sentinel_every must be >= 0");
    if (!(drift_tolerance > 0 && drift_tolerance < 1))
      throw std::invalid_argument("search.drift_tolerance must be in (0, 1)");
    for (double w : weights.kind)
      if (!(w >= 0)) throw std::invalid_argument("operators.weights must be non-negative");
  }

  std::int64_t effective_budget(std::size_t mutable_lines) const {
    return budget_steps > 0 ? budget_steps : coupon_budget(static_cast<std::int64_t>(mutable_lines), confidence);
  }
};

struct StepRecord {
  std::int64_t step = 0;
  std::string patch;
  GateStatus status = GateStatus::ok;
  std::size_t failed_case = 0;
  std::optional<double> metric;
  std::optional<double> rel_fitness;
  double elapsed_ms = 0;
  bool sentinel = false;
};

inline nlohmann::json to_json(const StepRecord& r) {
  nlohmann::json j;
  j["step"] = r.step;
  j["patch"] = r.patch;
  j["status"] = std::string(to_string(r.status));
  if (r.failed_case) j["failed_case"] = r.failed_case;
  j["metric"] = r.metric ? nlohmann::json(*r.metric) : nlohmann::json(nullptr);
  j["rel_fitness"] = r.rel_fitness ? nlohmann::json(*r.rel_fitness) : nlohmann::json(nullptr);
  j["elapsed_ms"] = r.elapsed_ms;
  j["sentinel"] = r.sentinel;
  return j;
}

inline StepRecord step_from_json(const nlohmann::json& j) {
  StepRecord r;
  r.step = j.at("step").get<std::int64_t>();
  r.patch = j.at("patch").get<std::string>();
  r.status = parse_gate_status(j.at("status").get<std::string>());
  if (j.contains("failed_case")) r.failed_case = j["failed_case"].get<std::size_t>();
  if (!j.at("metric").is_null()) r.metric = j["metric"].get<double>();
  if (!j.at("rel_fitness").is_null()) r.rel_fitness = j["rel_fitness"].get<double>();
  r.elapsed_ms = j.value("elapsed_ms", 0.0);
  r.sentinel = j.value("sentinel", false);
  return r;
}

/// Outcome counts per gate status over the search steps (not sentinels).
struct Accounting {
  std::map<GateStatus, std::int64_t> counts;

  void add(GateStatus s) { ++counts[s]; }
  std::int64_t total() const {
    std::int64_t n = 0;
    for (const auto& [s, c] : counts) n += c;
    return n;
  }
  std::int64_t count(GateStatus s) const {
    const auto it = counts.find(s);
    return it == counts.end() ? 0 : it->second;
  }
  double percent(GateStatus s) const { return total() ? 100.0 * static_cast<double>(count(s)) / static_cast<double>(total()) : 0.0; }
};

struct WarmupReport {
  double baseline = 0;
  std::vector<double> summarized;  // one per warm-up evaluation
  std::vector<double> relative;
};

struct SearchResult {
  Patch best_patch;
  FitnessRecord best_fitness;
  std::vector<StepRecord> log;
  Accounting accounting;
  std::vector<SentinelProbe> sentinels;
  DriftReport drift;
  double baseline = 0;
  std::int64_t budget = 0;
  std::uint64_t duplicates = 0;
};

class SearchError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using StepObserver = std::function<void(const StepRecord&)>;

/// Evaluates the unpatched program `warmup_count` times. The baseline is the
/// mean of the summarized metrics. When `tabu` is given, the original
/// artifact is registered so that no-op patches count as duplicates.
inline WarmupReport warm_up(const SourceRoster& roster, std::span<const TestCase> suite, Driver& driver,
                            const SearchConfig& cfg, TabuStore* tabu = nullptr) {
  const PatchedSource original = apply_patch(roster, Patch{});
  WarmupReport rep;
  driver.set_clock(0);
  for (std::size_t i = 0; i < cfg.warmup_count; ++i) {
    const auto rec = evaluate(original, suite, driver, {cfg.repeats, std::nullopt, nullptr});
    if (!rec.ok())
      throw SearchError("warm-up evaluation " + std::to_string(i + 1) + " failed (" +
                        std::string(to_string(rec.outcome.status)) + "): " + rec.outcome.detail +
                        "; the target does not pass its own test suite");
    rep.summarized.push_back(rec.summarized_metric);
  }
  rep.baseline = mean(rep.summarized);
  if (!(rep.baseline > 0)) throw SearchError("warm-up baseline is zero; nothing to reduce");
  for (double s : rep.summarized) rep.relative.push_back(s / rep.baseline);
  if (tabu) {
    const auto compiled = driver.compile(original);
    if (compiled.ok) tabu->register_artifact(compiled.artifact.bytes);
  }
  return rep;
}

namespace detail {

inline FitnessRecord unpatched_record(double baseline) {
  FitnessRecord r;
  r.summarized_metric = baseline;
  r.relative_fitness = 1.0;
  return r;
}

}  // namespace detail

/// First-improvement hill climbing from the empty patch.
inline SearchResult local_search(const SourceRoster& roster, std::span<const TestCase> suite, Driver& driver,
                                 const SearchConfig& cfg, double baseline, TabuStore& tabu,
                                 const StepObserver& observe = {}) {
  cfg.validate();
  using clock = std::chrono::steady_clock;
  SearchResult res;
  res.baseline = baseline;
  res.budget = cfg.effective_budget(roster.size());
  const auto names = roster.file_names();
  RngHandle rng(cfg.seed);

  Patch current;
  FitnessRecord current_fit = detail::unpatched_record(baseline);
  res.best_fitness = current_fit;
  std::int64_t stagnant = 0;
  double scale = baseline;

  const auto emit = [&](StepRecord r) {
    if (observe) observe(r);
    res.log.push_back(std::move(r));
  };

  for (std::int64_t step = 1; step <= res.budget; ++step) {
    driver.set_clock(step);
    const auto t0 = clock::now();
    Patch candidate = neighbor(current, roster, rng, cfg.weights);
    FitnessRecord rec = evaluate(apply_patch(roster, candidate), suite, driver, {cfg.repeats, scale, &tabu});

    StepRecord sr;
    sr.step = step;
    sr.patch = format_patch(candidate, names);
    sr.status = rec.outcome.status;
    sr.failed_case = rec.outcome.test_index;
    if (rec.ok()) {
      sr.metric = rec.summarized_metric;
      sr.rel_fitness = rec.relative_fitness;
    }
    sr.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - t0).count();
    res.accounting.add(rec.outcome.status);
    emit(std::move(sr));

    if (compare_fitness(rec, current_fit) == FitnessOrder::a_better) {
      if (compare_fitness(rec, res.best_fitness) == FitnessOrder::a_better) {
        res.best_fitness = rec;
        res.best_patch = candidate;
      }
      current = std::move(candidate);
      current_fit = std::move(rec);
      stagnant = 0;
    } else if (++stagnant >= cfg.restart_after) {
      current = Patch{};
      current_fit = detail::unpatched_record(scale);
      stagnant = 0;
    }

    if (cfg.sentinel_every > 0 && step % cfg.sentinel_every == 0) {
      const auto s0 = clock::now();
      const auto probe = evaluate(apply_patch(roster, Patch{}), suite, driver, {cfg.repeats, scale, nullptr});
      StepRecord pr;
      pr.step = step;
      pr.patch = "";
      pr.status = probe.outcome.status;
      pr.failed_case = probe.outcome.test_index;
      pr.sentinel = true;
      if (probe.ok()) {
        pr.metric = probe.summarized_metric;
        pr.rel_fitness = probe.summarized_metric / baseline;
        res.sentinels.push_back({step, probe.summarized_metric});
        const double ratio = probe.summarized_metric / scale;
        if (cfg.rebaseline_on_drift && (ratio < 1 - cfg.drift_tolerance || ratio > 1 + cfg.drift_tolerance))
          scale = probe.summarized_metric;
      }
      pr.elapsed_ms = std::chrono::duration<double, std::milli>(clock::now() - s0).count();
      emit(std::move(pr));
    }
  }
  res.duplicates = tabu.duplicate_count();
  if (!res.sentinels.empty()) res.drift = drift_check(res.sentinels, baseline, cfg.drift_tolerance);
  return res;
}

/// Greedy backward pass: drop each edit (last to first) when the remaining
/// patch still passes gates 1-3 and its relative fitness is no more than
/// `minify_slack` worse than the patch kept so far.
inline Patch minify(const Patch& patch, const SourceRoster& roster, std::span<const TestCase> suite, Driver& driver,
                    const SearchConfig& cfg, double baseline) {
  const EvaluationOptions opt{cfg.repeats, baseline, nullptr};
  FitnessRecord kept = evaluate(apply_patch(roster, patch), suite, driver, opt);
  if (!kept.ok())
    throw SearchError("minify: input patch fails " + std::string(to_string(kept.outcome.status)) + ": " +
                      kept.outcome.detail);
  Patch out = patch;
  for (std::size_t i = out.size(); i-- > 0;) {
    Patch reduced = out;
    reduced.edits.erase(reduced.edits.begin() + static_cast<std::ptrdiff_t>(i));
    FitnessRecord rec = evaluate(apply_patch(roster, reduced), suite, driver, opt);
    if (rec.ok() && *rec.relative_fitness <= *kept.relative_fitness + cfg.minify_slack) {
      out = std::move(reduced);
      kept = std::move(rec);
    }
  }
  return out;
}

}  // namespace cachegi
