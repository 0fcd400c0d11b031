#pragma once

// Subcommands behind the `cachegi` executable. Each returns a process exit
// status and writes human-readable text to `out`, diagnostics to `err`.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cachegi/cachesim.hpp"
#include "cachegi/config.hpp"
#include "cachegi/evaluation.hpp"
#include "cachegi/report.hpp"
#include "cachegi/search_engine.hpp"
#include "cachegi/source_model.hpp"
#include "cachegi/stats.hpp"
#include "cachegi/test_suite.hpp"
#include "cachegi/trace_dsl.hpp"

namespace cachegi {

namespace detail {

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + p.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

inline void write_file(const std::filesystem::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

inline std::vector<TestCase> load_cases(const std::filesystem::path& suite_path, const SourceRoster& roster,
                                        Driver& driver) {
  return record_expectations(apply_patch(roster, Patch{}), load_suite(suite_path), driver);
}

}  // namespace detail

/// Runs warm-up and local search, writing into the config's output_dir:
/// best.patch, run_log.jsonl, warmup.{txt,json}, accounting.{txt,json},
/// summary.json and the tabu/ store.
inline int cmd_search(const std::filesystem::path& config_path, bool force, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_run_config(config_path);
    const auto& dir = cfg.output_dir;
    if (std::filesystem::exists(dir) && !std::filesystem::is_empty(dir)) {
      if (!force) {
        err << "error: output directory '" << dir.string() << "' is not empty; pass --force to overwrite\n";
        return 1;
      }
      std::filesystem::remove_all(dir);
    }
    std::filesystem::create_directories(dir);

    const auto t0 = std::chrono::steady_clock::now();
    const SourceRoster roster = load_roster(cfg);
    auto driver = make_driver(cfg);
    const auto suite = detail::load_cases(cfg.suite, roster, *driver);
    TabuStore tabu(dir / "tabu");

    const WarmupReport warm = warm_up(roster, suite, *driver, cfg.search, &tabu);
    {
      nlohmann::json wj{{"baseline", warm.baseline}, {"summarized", warm.summarized}, {"relative", warm.relative}};
      detail::write_file(dir / "warmup.json", wj.dump(2) + "\n");
      std::ostringstream wt;
      wt << "warm-up of the unpatched program (" << warm.summarized.size() << " evaluations)\n";
      for (std::size_t i = 0; i < warm.summarized.size(); ++i)
        wt << "  " << (i + 1) << "  " << fmt("%.1f", warm.summarized[i]) << "  " << fmt("%.4f", warm.relative[i])
           << "\n";
      wt << "baseline " << fmt("%.3f", warm.baseline) << "\n";
      detail::write_file(dir / "warmup.txt", wt.str());
    }

    std::ofstream log(dir / "run_log.jsonl", std::ios::binary);
    if (!log) throw std::runtime_error("cannot write run log in '" + dir.string() + "'");
    const auto observer = [&](const StepRecord& r) { log << to_json(r).dump() << "\n" << std::flush; };
    const SearchResult res = local_search(roster, suite, *driver, cfg.search, warm.baseline, tabu, observer);
    log.close();

    const auto names = roster.file_names();
    const std::string best = format_patch(res.best_patch, names);
    const double best_rel = res.best_fitness.relative_fitness.value_or(1.0);
    detail::write_file(dir / "best.patch", best + "\n");
    detail::write_file(dir / "accounting.txt", render_accounting(res.accounting));
    detail::write_file(dir / "accounting.json", accounting_json(res.accounting).dump(2) + "\n");

    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    nlohmann::json summary{{"best_patch", best},
                           {"best_relative_fitness", best_rel},
                           {"best_summarized_metric", res.best_fitness.summarized_metric},
                           {"baseline", warm.baseline},
                           {"mutable_lines", roster.size()},
                           {"budget_steps", res.budget},
                           {"seed", cfg.search.seed},
                           {"tabu_duplicates", res.duplicates},
                           {"tabu_stored", tabu.stored_count()},
                           {"sentinel_probes", res.sentinels.size()},
                           {"drift", drift_json(res.drift)},
                           {"accounting", accounting_json(res.accounting)},
                           {"wall_seconds", seconds}};
    detail::write_file(dir / "summary.json", summary.dump(2) + "\n");

    out << "mutable lines    " << roster.size() << "\n"
        << "budget           " << res.budget << " steps\n"
        << "baseline         " << fmt("%.3f", warm.baseline) << "\n"
        << "best fitness     " << fmt("%.4f", best_rel) << "\n"
        << "best patch       " << (best.empty() ? "(empty)" : best) << "\n"
        << "tabu duplicates  " << res.duplicates << "\n";
    if (!res.sentinels.empty())
      out << "drift            " << (res.drift.drifting ? "detected" : "none") << " (worst ratio "
          << fmt("%.4f", res.drift.worst_ratio) << ")"
          << (res.drift.onset_step ? ", onset at step " + std::to_string(*res.drift.onset_step) : std::string())
          << "\n";
    out << "\n" << render_accounting(res.accounting) << "\noutputs in " << dir.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

struct ValidationCase {
  std::string id;
  bool passed = false;
  std::string failure;
  std::vector<double> original;
  std::vector<double> patched;
};

struct ValidationReport {
  std::vector<ValidationCase> cases;
  std::size_t passed = 0;
  DistributionSummary original, patched;
  double original_q1_sum = 0, patched_q1_sum = 0;
  MannWhitneyResult mw;
  double alpha = 0.05;

  bool functional_ok() const { return passed == cases.size(); }
  bool improvement_generalises() const {
    return patched.n > 0 && mw.p_two_sided < alpha && patched_q1_sum < original_q1_sum;
  }
};

/// Runs the original and patched programs over `cases`: functional check of
/// the patched program, then `repeats` metric runs of both variants.
inline ValidationReport validate_patch(const SourceRoster& roster, const Patch& patch,
                                       const std::vector<TestCase>& cases, Driver& driver, std::size_t repeats,
                                       double alpha = 0.05) {
  if (repeats < 1) throw std::invalid_argument("repeats must be >= 1");
  ValidationReport rep;
  rep.alpha = alpha;
  const auto orig_c = driver.compile(apply_patch(roster, Patch{}));
  if (!orig_c.ok) throw TargetError("original program does not compile: " + orig_c.diagnostics);
  const auto patched_c = driver.compile(apply_patch(roster, patch));

  std::vector<double> all_orig, all_patched;
  for (const auto& tc : cases) {
    ValidationCase vc;
    vc.id = tc.id;
    if (!patched_c.ok) {
      vc.failure = "compile error: " + patched_c.diagnostics;
    } else {
      const RunResult r = driver.run(patched_c.artifact, tc, false);
      if (r.status == RunStatus::timeout)
        vc.failure = "timeout: " + r.detail;
      else if (r.status == RunStatus::fault)
        vc.failure = "run error: " + r.detail;
      else if (r.exit_status != tc.expected_exit)
        vc.failure = "exit status " + std::to_string(r.exit_status) + ", expected " + std::to_string(tc.expected_exit);
      else if (r.output != tc.expected_output)
        vc.failure = "output differs";
      else
        vc.passed = true;
    }
    const auto measure = [&](const Artifact& a, std::vector<double>& into) {
      for (std::size_t k = 0; k < repeats; ++k) {
        const RunResult r = driver.run(a, tc, true);
        if (r.status != RunStatus::exited || !r.metric) return false;
        into.push_back(static_cast<double>(*r.metric));
      }
      return true;
    };
    if (!measure(orig_c.artifact, vc.original)) vc.original.clear();
    if (vc.passed && !measure(patched_c.artifact, vc.patched)) {
      vc.passed = false;
      vc.failure = "metric collection failed";
      vc.patched.clear();
    }
    if (!vc.original.empty()) rep.original_q1_sum += quartile1(vc.original);
    if (!vc.patched.empty()) rep.patched_q1_sum += quartile1(vc.patched);
    all_orig.insert(all_orig.end(), vc.original.begin(), vc.original.end());
    all_patched.insert(all_patched.end(), vc.patched.begin(), vc.patched.end());
    if (vc.passed) ++rep.passed;
    rep.cases.push_back(std::move(vc));
  }
  rep.original = summarize_distribution(all_orig);
  rep.patched = summarize_distribution(all_patched);
  if (!all_orig.empty() && !all_patched.empty()) rep.mw = mann_whitney(all_orig, all_patched);
  else rep.mw.p_two_sided = 1.0;
  return rep;
}

inline std::string render_validation(const ValidationReport& r) {
  std::ostringstream out;
  out << "holdout cases        " << r.cases.size() << "\n"
      << "functional passes    " << r.passed << "/" << r.cases.size() << "\n";
  for (const auto& c : r.cases)
    if (!c.passed) out << "  FAILED " << c.id << ": " << c.failure << "\n";
  const auto row = [&](const char* name, const DistributionSummary& s) {
    char line[160];
    std::snprintf(line, sizeof line, "%-9s %5zu %10.1f %10.1f %10.1f %12.2f %10.1f\n", name, s.n, s.min, s.q1,
                  s.median, s.mean, s.max);
    out << line;
  };
  out << "\nmisses        n        min         q1     median         mean        max\n";
  row("original", r.original);
  row("patched", r.patched);
  const auto pct = [](double a, double b) { return b > 0 ? fmt("%+.2f%%", 100.0 * (a - b) / b) : std::string("n/a"); };
  out << "\nsum of per-case Q1   " << fmt("%.1f", r.original_q1_sum) << " -> " << fmt("%.1f", r.patched_q1_sum)
      << " (" << pct(r.patched_q1_sum, r.original_q1_sum) << ")\n"
      << "mean                 " << fmt("%.2f", r.original.mean) << " -> " << fmt("%.2f", r.patched.mean) << " ("
      << pct(r.patched.mean, r.original.mean) << ")\n"
      << "Mann-Whitney U       " << fmt("%.1f", r.mw.u) << ", two-sided p = " << fmt("%.3g", r.mw.p_two_sided)
      << (r.mw.exact ? " (exact)" : " (normal approximation)") << "\n\n";
  out << "verdict: " << (r.functional_ok() ? "patch functionally generalises" : "patch does NOT functionally generalise")
      << "\n";
  out << "verdict: "
      << (r.improvement_generalises()
              ? "cache improvement generalises (p < " + fmt("%g", r.alpha) + ")"
              : "cache improvement does NOT generalise (p >= " + fmt("%g", r.alpha) + " or no reduction)")
      << "\n";
  return out.str();
}

inline nlohmann::json validation_json(const ValidationReport& r) {
  nlohmann::json cases = nlohmann::json::array();
  for (const auto& c : r.cases) {
    nlohmann::json cj{{"id", c.id}, {"passed", c.passed}, {"original", c.original}, {"patched", c.patched}};
    if (!c.passed) cj["failure"] = c.failure;
    cases.push_back(std::move(cj));
  }
  return {{"cases", cases},
          {"functional_passes", r.passed},
          {"functional_total", r.cases.size()},
          {"original", distribution_json(r.original)},
          {"patched", distribution_json(r.patched)},
          {"original_q1_sum", r.original_q1_sum},
          {"patched_q1_sum", r.patched_q1_sum},
          {"mann_whitney", {{"u", r.mw.u}, {"p_two_sided", r.mw.p_two_sided}, {"exact", r.mw.exact}}},
          {"alpha", r.alpha},
          {"functionally_generalises", r.functional_ok()},
          {"improvement_generalises", r.improvement_generalises()}};
}

/// Validates a patch on the holdout suite. Writes validation.{txt,json} into
/// `report_dir` (default: the config's output_dir). Exit status is nonzero
/// iff some holdout case fails functionally.
inline int cmd_validate(const std::filesystem::path& config_path, const std::filesystem::path& patch_path,
                        std::size_t repeats, double alpha, const std::optional<std::filesystem::path>& report_dir,
                        std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_run_config(config_path);
    if (!cfg.holdout) {
      err << "error: config has no holdout suite\n";
      return 2;
    }
    const SourceRoster roster = load_roster(cfg);
    const Patch patch = parse_patch(detail::read_file(patch_path), roster.file_names());
    auto driver = make_driver(cfg);
    const auto cases = detail::load_cases(*cfg.holdout, roster, *driver);
    const ValidationReport rep = validate_patch(roster, patch, cases, *driver, repeats, alpha);
    const std::string text = render_validation(rep);
    out << text;
    const auto dir = report_dir.value_or(cfg.output_dir);
    std::filesystem::create_directories(dir);
    detail::write_file(dir / "validation.txt", text);
    detail::write_file(dir / "validation.json", validation_json(rep).dump(2) + "\n");
    return rep.functional_ok() ? 0 : 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
}

inline int cmd_budget(std::int64_t n, double p, std::ostream& out, std::ostream& err) {
  try {
    const auto t = coupon_budget(n, p);
    out << "budget " << t << "\n\n     draws  coverage\n";
    for (double f : {0.25, 0.5, 0.75, 1.0, 1.25, 1.5}) {
      const auto draws = static_cast<std::int64_t>(std::llround(f * static_cast<double>(t)));
      char line[64];
      std::snprintf(line, sizeof line, "%10lld  %.6f\n", static_cast<long long>(draws), coverage_probability(n, draws));
      out << line;
    }
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int cmd_apply(const std::filesystem::path& config_path, const std::filesystem::path& patch_path,
                     const std::filesystem::path& out_dir, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_run_config(config_path);
    const SourceRoster roster = load_roster(cfg);
    const Patch patch = parse_patch(detail::read_file(patch_path), roster.file_names());
    write_patched_source(apply_patch(roster, patch), out_dir);
    out << "wrote " << roster.files.size() << " file(s) to " << out_dir.string() << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

/// Establishes a warm-up baseline, then minifies the patch on the training
/// suite. Prints the reduced patch and writes it to `out_path` when given.
inline int cmd_minify(const std::filesystem::path& config_path, const std::filesystem::path& patch_path,
                      const std::optional<std::filesystem::path>& out_path, std::ostream& out, std::ostream& err) {
  try {
    const RunConfig cfg = load_run_config(config_path);
    const SourceRoster roster = load_roster(cfg);
    const auto names = roster.file_names();
    const Patch patch = parse_patch(detail::read_file(patch_path), names);
    auto driver = make_driver(cfg);
    const auto suite = detail::load_cases(cfg.suite, roster, *driver);
    const WarmupReport warm = warm_up(roster, suite, *driver, cfg.search);
    const Patch reduced = minify(patch, roster, suite, *driver, cfg.search, warm.baseline);
    const std::string text = format_patch(reduced, names);
    if (out_path) detail::write_file(*out_path, text + "\n");
    out << text << "\n";
    err << "kept " << reduced.size() << " of " << patch.size() << " edit(s)\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

inline int cmd_report(const std::filesystem::path& log_path, std::ostream& out, std::ostream& err) {
  try {
    std::ifstream in(log_path);
    if (!in) throw std::runtime_error("cannot read run log '" + log_path.string() + "'");
    const auto log = read_run_log(in);
    out << render_accounting(accounting_from_log(log)) << "\n" << render_trajectory(log);
    const auto sentinels = render_sentinels(log);
    if (!sentinels.empty()) out << "\n" << sentinels;
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

/// Simulates either a trace dump (`R|W <hex> <size>` lines) or a trace
/// program run with `bindings`. With `dump_out`, the program's access
/// stream is also written in dump format.
inline int cmd_simulate_trace(const std::optional<std::filesystem::path>& dump_path,
                              const std::optional<std::filesystem::path>& program_path, const std::string& bindings,
                              const CacheConfig& cache, std::uint64_t access_limit,
                              const std::optional<std::filesystem::path>& dump_out, std::ostream& out,
                              std::ostream& err) {
  try {
    cache.validate();
    std::vector<Access> accesses;
    if (dump_path) {
      std::ifstream in(*dump_path);
      if (!in) throw std::runtime_error("cannot read trace dump '" + dump_path->string() + "'");
      accesses = read_trace_dump(in);
    } else if (program_path) {
      const auto prog = parse_trace_program(detail::read_file(*program_path));
      const auto run = run_trace_program(prog, parse_bindings(bindings), access_limit);
      for (auto v : run.emitted) out << "emit " << v << "\n";
      accesses = run.accesses;
      if (dump_out) {
        std::ofstream d(*dump_out);
        for (const auto& a : accesses) d << format_access(a) << "\n";
      }
    } else {
      throw std::invalid_argument("give a trace dump or a trace program");
    }
    const auto stats = simulate(cache, accesses);
    out << "cache      " << cache.size_bytes << " B, " << cache.line_bytes << " B lines, " << cache.associativity
        << "-way, " << cache.sets() << " sets\n"
        << "accesses   " << stats.accesses << "\n"
        << "misses     " << stats.misses << "\n"
        << "evictions  " << stats.evictions << "\n";
    return 0;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }
}

}  // namespace cachegi
