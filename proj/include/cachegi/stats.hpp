#pragma once

// Robust statistics for noisy measurements.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace cachegi {

/// Nearest-rank lower quartile: the element at 0-based rank floor((n-1)/4)
/// of the sorted samples. No interpolation, so values above the returned
/// rank can grow without changing the result.
inline double quartile1(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("quartile1: empty sample");
  std::vector<double> v(samples.begin(), samples.end());
  const auto rank = (v.size() - 1) / 4;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(rank), v.end());
  return v[rank];
}

inline double mean(std::span<const double> samples) {
  if (samples.empty()) throw std::invalid_argument("mean: empty sample");
  double s = 0;
  for (double x : samples) s += x;
  return s / static_cast<double>(samples.size());
}

struct MannWhitneyResult {
  double u = 0;            // statistic for the first sample
  double p_two_sided = 1;
  bool exact = false;
};

namespace detail {

// Midranks (1-based) of the pooled sample; ties share the mean rank.
inline std::vector<double> midranks(const std::vector<double>& pooled) {
  std::vector<std::size_t> order(pooled.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return pooled[a] < pooled[b]; });
  std::vector<double> rank(pooled.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && pooled[order[j + 1]] == pooled[order[i]]) ++j;
    const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = r;
    i = j + 1;
  }
  return rank;
}

}  // namespace detail

inline constexpr std::size_t kMannWhitneyExactMinSide = 8;
inline constexpr std::size_t kMannWhitneyExactMaxTotal = 20;

/// Two-sided Mann-Whitney U test with midranks for ties. Small samples get
/// the exact permutation distribution of the midrank statistic; larger ones
/// the tie-corrected normal approximation with continuity correction.
inline MannWhitneyResult mann_whitney(std::span<const double> a, std::span<const double> b) {
  if (a.empty() || b.empty()) throw std::invalid_argument("mann_whitney: empty sample");
  const std::size_t na = a.size(), nb = b.size(), n = na + nb;
  std::vector<double> pooled(a.begin(), a.end());
  pooled.insert(pooled.end(), b.begin(), b.end());
  const auto rank = detail::midranks(pooled);

  double ra = 0;
  for (std::size_t i = 0; i < na; ++i) ra += rank[i];
  const double base = static_cast<double>(na) * static_cast<double>(na + 1) / 2.0;
  MannWhitneyResult res;
  res.u = ra - base;
  const double mu = static_cast<double>(na) * static_cast<double>(nb) / 2.0;
  const double observed = std::abs(res.u - mu);
  constexpr double eps = 1e-9;

  if (std::min(na, nb) <= kMannWhitneyExactMinSide && n <= kMannWhitneyExactMaxTotal) {
    res.exact = true;
    // Enumerate every choice of na positions out of n via bitmasks.
    std::uint64_t total = 0, extreme = 0;
    const std::uint32_t limit = 1u << n;
    for (std::uint32_t mask = 0; mask < limit; ++mask) {
      if (static_cast<std::size_t>(__builtin_popcount(mask)) != na) continue;
      double r = 0;
      for (std::size_t i = 0; i < n; ++i)
        if (mask & (1u << i)) r += rank[i];
      ++total;
      if (std::abs(r - base - mu) >= observed - eps) ++extreme;
    }
    res.p_two_sided = static_cast<double>(extreme) / static_cast<double>(total);
    return res;
  }

  std::map<double, std::size_t> ties;
  for (double x : pooled) ++ties[x];
  double tie_term = 0;
  for (const auto& [v, t] : ties) {
    const double td = static_cast<double>(t);
    tie_term += td * td * td - td;
  }
  const double nd = static_cast<double>(n);
  const double var = static_cast<double>(na) * static_cast<double>(nb) / 12.0 *
                     ((nd + 1.0) - tie_term / (nd * (nd - 1.0)));
  if (var <= 0) {
    res.p_two_sided = 1.0;
    return res;
  }
  const double z = std::max(0.0, observed - 0.5) / std::sqrt(var);
  res.p_two_sided = std::min(1.0, std::erfc(z / std::sqrt(2.0)));
  return res;
}

struct DriftReport {
  bool drifting = false;
  double worst_ratio = 1.0;
  std::optional<std::int64_t> onset_step;
};

struct SentinelProbe {
  std::int64_t step = 0;
  double metric = 0;
};

/// Flags sentinel measurements whose ratio to `baseline` leaves
/// [1 - tolerance, 1 + tolerance].
inline DriftReport drift_check(std::span<const SentinelProbe> history, double baseline, double tolerance) {
  if (!(baseline > 0)) throw std::invalid_argument("drift_check: baseline must be positive");
  DriftReport rep;
  double worst_dev = -1;
  for (const auto& probe : history) {
    const double ratio = probe.metric / baseline;
    const double dev = std::abs(ratio - 1.0);
    if (dev > worst_dev) {
      worst_dev = dev;
      rep.worst_ratio = ratio;
    }
    if (ratio < 1.0 - tolerance || ratio > 1.0 + tolerance) {
      if (!rep.drifting) rep.onset_step = probe.step;
      rep.drifting = true;
    }
  }
  return rep;
}

/// Asymptotic probability that t uniform draws from N coupons collect all of
/// them: exp(-N e^(-t/N)).
inline double coverage_probability(std::int64_t n, std::int64_t t) {
  if (n < 1 || t < 0) throw std::invalid_argument("coverage_probability: need N >= 1 and t >= 0");
  const double nd = static_cast<double>(n);
  return std::exp(-nd * std::exp(-static_cast<double>(t) / nd));
}

}  // namespace cachegi
