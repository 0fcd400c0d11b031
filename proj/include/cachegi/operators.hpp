#pragma once

// Random line edits and the three-move neighbourhood used by local search.

#include <array>
#include <cstdint>
#include <random>
#include <stdexcept>

#include "cachegi/source_model.hpp"

namespace cachegi {

/// Seeded random stream. Bounded draws use rejection sampling on the raw
/// 64-bit engine output, so sequences are identical across standard
/// libraries (the std distributions are not).
class RngHandle {
 public:
  explicit RngHandle(std::uint64_t seed = 0) : engine_(seed), seed_(seed) {}

  std::uint64_t seed() const noexcept { return seed_; }

  std::uint64_t next() { return engine_(); }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("RngHandle::below: empty range");
    const std::uint64_t limit = UINT64_MAX - (UINT64_MAX % n + 1) % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x > limit);
    return x % n;
  }

  /// Uniform real in [0, 1).
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Index drawn with probability proportional to `weights[i]`.
  template <std::size_t N>
  std::size_t weighted(const std::array<double, N>& weights) {
    double total = 0;
    for (double w : weights) total += w;
    if (!(total > 0)) throw std::invalid_argument("RngHandle::weighted: weights sum to zero");
    double u = unit() * total;
    for (std::size_t i = 0; i < N; ++i) {
      if (u < weights[i]) return i;
      u -= weights[i];
    }
    for (std::size_t i = N; i-- > 0;)
      if (weights[i] > 0) return i;
    return 0;
  }

 private:
  std::mt19937_64 engine_;
  std::uint64_t seed_;
};

/// Relative frequencies of Deletion, Insertion and Replacement.
struct OperatorWeights {
  std::array<double, 3> kind{1.0, 1.0, 1.0};
};

inline Edit sample_edit(const SourceRoster& roster, RngHandle& rng, const OperatorWeights& weights = {}) {
  const auto n = roster.mutable_points.size();
  if (n == 0) throw std::invalid_argument("sample_edit: roster has no mutable points");
  if (n == 1 && weights.kind[0] <= 0 && weights.kind[1] <= 0)
    throw std::invalid_argument("sample_edit: only no-op replacements are possible on a one-line roster");
  for (;;) {
    const auto kind = static_cast<EditKind>(rng.weighted(weights.kind));
    // A one-line roster has no replacement that changes anything.
    if (kind == EditKind::replacement && n == 1) continue;
    const std::size_t t = rng.below(n);
    const LineRef target = roster.mutable_points[t];
    if (kind == EditKind::deletion) return Edit::deletion(target);
    if (kind == EditKind::insertion) return Edit::insertion(target, roster.mutable_points[rng.below(n)]);
    // Replacement sources exclude the target itself.
    std::size_t s = rng.below(n - 1);
    if (s >= t) ++s;
    return Edit::replacement(target, roster.mutable_points[s]);
  }
}

enum class MoveKind { append, remove, replace };

struct NeighborMoveWeights {
  std::array<double, 3> kind{1.0, 1.0, 1.0};
};

struct Neighbor {
  Patch patch;
  MoveKind move = MoveKind::append;
  std::size_t index = 0;  // position of the affected edit
};

/// Applies one structural move to a copy of `patch`.
inline Patch apply_move(const Patch& patch, MoveKind move, std::size_t index, const Edit& fresh) {
  Patch out = patch;
  switch (move) {
    case MoveKind::append:
      out.edits.push_back(fresh);
      break;
    case MoveKind::remove:
      out.edits.erase(out.edits.begin() + static_cast<std::ptrdiff_t>(index));
      break;
    case MoveKind::replace:
      out.edits[index] = fresh;
      break;
  }
  return out;
}

inline Neighbor propose_neighbor(const Patch& patch, const SourceRoster& roster, RngHandle& rng,
                                 const OperatorWeights& ops = {}, const NeighborMoveWeights& moves = {}) {
  auto w = moves.kind;
  if (patch.empty()) w[1] = w[2] = 0.0;
  if (!(w[0] + w[1] + w[2] > 0)) w[0] = 1.0;
  const auto move = static_cast<MoveKind>(rng.weighted(w));
  Neighbor n;
  n.move = move;
  if (move == MoveKind::append) {
    n.index = patch.size();
    n.patch = apply_move(patch, move, 0, sample_edit(roster, rng, ops));
  } else if (move == MoveKind::remove) {
    n.index = rng.below(patch.size());
    n.patch = apply_move(patch, move, n.index, {});
  } else {
    n.index = rng.below(patch.size());
    n.patch = apply_move(patch, move, n.index, sample_edit(roster, rng, ops));
  }
  return n;
}

inline Patch neighbor(const Patch& patch, const SourceRoster& roster, RngHandle& rng,
                      const OperatorWeights& ops = {}) {
  return propose_neighbor(patch, roster, rng, ops).patch;
}

}  // namespace cachegi
