// cachegi: line-level genetic improvement against L1 data-cache misses.

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "cachegi/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Genetic improvement of programs to reduce L1 data-cache misses"};
  app.require_subcommand(1);
  int status = 0;

  std::string config, patch, out_dir, log_path, dump, program, dump_out, bindings;
  bool force = false;
  std::size_t repeats = 11;
  double alpha = 0.05;
  std::int64_t n = 0;
  double confidence = 0.99;
  cachegi::CacheConfig cache;
  std::uint64_t access_limit = 10'000'000;

  auto* search = app.add_subcommand("search", "warm up, search and write the best patch");
  search->add_option("config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  search->add_flag("--force", force, "replace a non-empty output directory");
  search->callback([&] { status = cachegi::cmd_search(config, force, std::cout, std::cerr); });

  auto* validate = app.add_subcommand("validate", "check a patch on the holdout suite");
  validate->add_option("config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  validate->add_option("patch", patch, "patch file")->required()->check(CLI::ExistingFile);
  validate->add_option("--repeats", repeats, "metric repetitions per case")->check(CLI::PositiveNumber);
  validate->add_option("--alpha", alpha, "significance level for the improvement verdict");
  validate->add_option("--report-dir", out_dir, "where to write validation.{txt,json} (default: output_dir)");
  validate->callback([&] {
    status = cachegi::cmd_validate(config, patch, repeats, alpha,
                                   out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir),
                                   std::cout, std::cerr);
  });

  auto* budget = app.add_subcommand("budget", "coupon-collector step budget for N lines");
  budget->add_option("N", n, "number of mutable lines")->required();
  budget->add_option("confidence", confidence, "probability of sampling every line");
  budget->callback([&] { status = cachegi::cmd_budget(n, confidence, std::cout, std::cerr); });

  auto* apply = app.add_subcommand("apply", "write patched sources to a directory");
  apply->add_option("config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  apply->add_option("patch", patch, "patch file")->required()->check(CLI::ExistingFile);
  apply->add_option("out_dir", out_dir, "destination directory")->required();
  apply->callback([&] { status = cachegi::cmd_apply(config, patch, out_dir, std::cout, std::cerr); });

  auto* minify = app.add_subcommand("minify", "drop edits that do not help");
  minify->add_option("config", config, "run configuration (JSON)")->required()->check(CLI::ExistingFile);
  minify->add_option("patch", patch, "patch file")->required()->check(CLI::ExistingFile);
  minify->add_option("-o,--output", out_dir, "write the reduced patch here");
  minify->callback([&] {
    status = cachegi::cmd_minify(config, patch,
                                 out_dir.empty() ? std::nullopt : std::optional<std::filesystem::path>(out_dir),
                                 std::cout, std::cerr);
  });

  auto* report = app.add_subcommand("report", "accounting and fitness trajectory of a run log");
  report->add_option("log", log_path, "run_log.jsonl")->required()->check(CLI::ExistingFile);
  report->callback([&] { status = cachegi::cmd_report(log_path, std::cout, std::cerr); });

  auto* sim = app.add_subcommand("simulate-trace", "count L1D misses of a trace dump or trace program");
  auto* dump_opt = sim->add_option("--dump", dump, "access dump, one `R|W <hex> <size>` per line")->check(CLI::ExistingFile);
  auto* prog_opt = sim->add_option("--program", program, "trace program")->check(CLI::ExistingFile);
  dump_opt->excludes(prog_opt);
  sim->add_option("--bindings", bindings, "parameter bindings, e.g. \"seed=1 N=64\"");
  sim->add_option("--write-dump", dump_out, "write the program's access stream here");
  sim->add_option("--size", cache.size_bytes, "cache size in bytes");
  sim->add_option("--line", cache.line_bytes, "line size in bytes");
  sim->add_option("--ways", cache.associativity, "associativity");
  sim->add_option("--access-limit", access_limit, "maximum accesses for a program run");
  sim->callback([&] {
    const auto opt = [](const std::string& s) {
      return s.empty() ? std::nullopt : std::optional<std::filesystem::path>(s);
    };
    status = cachegi::cmd_simulate_trace(opt(dump), opt(program), bindings, cache, access_limit, opt(dump_out),
                                         std::cout, std::cerr);
  });

  CLI11_PARSE(app, argc, argv);
  return status;
}
