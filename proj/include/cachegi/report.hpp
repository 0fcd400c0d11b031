#pragma once

// Plain-text and JSON renderings of search and validation results.

#include <algorithm>
#include <cstdio>
#include <istream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cachegi/evaluation.hpp"
#include "cachegi/search_engine.hpp"
#include "cachegi/stats.hpp"

namespace cachegi {

inline std::string fmt(const char* spec, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

inline Accounting accounting_from_log(const std::vector<StepRecord>& log) {
  Accounting a;
  for (const auto& r : log)
    if (!r.sentinel) a.add(r.status);
  return a;
}

/// Outcome table: one row per gate status with count and percentage.
inline std::string render_accounting(const Accounting& a) {
  std::ostringstream out;
  out << "outcome            count  percent\n";
  for (auto s : kAllGateStatuses) {
    char line[96];
    std::snprintf(line, sizeof line, "%-17s %6lld  %6.2f%%\n", std::string(to_string(s)).c_str(),
                  static_cast<long long>(a.count(s)), a.percent(s));
    out << line;
  }
  char line[96];
  std::snprintf(line, sizeof line, "%-17s %6lld  %6.2f%%\n", "total", static_cast<long long>(a.total()),
                a.total() ? 100.0 : 0.0);
  out << line;
  return out.str();
}

inline nlohmann::json accounting_json(const Accounting& a) {
  nlohmann::json j;
  for (auto s : kAllGateStatuses)
    j[std::string(to_string(s))] = {{"count", a.count(s)}, {"percent", a.percent(s)}};
  j["total"] = a.total();
  return j;
}

inline std::vector<StepRecord> read_run_log(std::istream& in) {
  std::vector<StepRecord> log;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      log.push_back(step_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      throw std::runtime_error("run log line " + std::to_string(n) + ": " + e.what());
    }
  }
  return log;
}

/// Fitness trajectory: one row per search step (sentinels excluded) with the
/// best relative fitness seen so far, starting from the unpatched 1.0.
inline std::string render_trajectory(const std::vector<StepRecord>& log) {
  std::ostringstream out;
  out << "  step  status            rel_fitness  best_so_far  patch\n";
  double best = 1.0;
  for (const auto& r : log) {
    if (r.sentinel) continue;
    if (r.rel_fitness && *r.rel_fitness < best) best = *r.rel_fitness;
    char line[128];
    std::snprintf(line, sizeof line, "%6lld  %-16s  %11s  %11.4f  ", static_cast<long long>(r.step),
                  std::string(to_string(r.status)).c_str(),
                  r.rel_fitness ? fmt("%.4f", *r.rel_fitness).c_str() : "-", best);
    out << line << r.patch << "\n";
  }
  return out.str();
}

inline std::string render_sentinels(const std::vector<StepRecord>& log) {
  std::ostringstream out;
  bool any = false;
  for (const auto& r : log) {
    if (!r.sentinel) continue;
    if (!any) out << "sentinel probes (step, metric, ratio to warm-up baseline):\n";
    any = true;
    out << "  " << r.step << "  " << (r.metric ? fmt("%.1f", *r.metric) : "-") << "  "
        << (r.rel_fitness ? fmt("%.4f", *r.rel_fitness) : "-") << "\n";
  }
  return out.str();
}

inline nlohmann::json drift_json(const DriftReport& d) {
  return {{"drifting", d.drifting},
          {"worst_ratio", d.worst_ratio},
          {"onset_step", d.onset_step ? nlohmann::json(*d.onset_step) : nlohmann::json(nullptr)}};
}

struct DistributionSummary {
  std::size_t n = 0;
  double min = 0, q1 = 0, median = 0, mean = 0, max = 0;
};

inline DistributionSummary summarize_distribution(std::vector<double> v) {
  DistributionSummary s;
  if (v.empty()) return s;
  std::sort(v.begin(), v.end());
  s.n = v.size();
  s.min = v.front();
  s.max = v.back();
  s.q1 = quartile1(v);
  const std::size_t h = v.size() / 2;
  s.median = v.size() % 2 ? v[h] : (v[h - 1] + v[h]) / 2;
  s.mean = mean(v);
  return s;
}

inline nlohmann::json distribution_json(const DistributionSummary& s) {
  return {{"n", s.n}, {"min", s.min}, {"q1", s.q1}, {"median", s.median}, {"mean", s.mean}, {"max", s.max}};
}

}  // namespace cachegi
