#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "margin/rng.hpp"
#include "margin/spectral.hpp"

namespace margin {

/// Per-node magnitude of the high-pass output: squared (default) or
/// absolute value. Both induce the same ranking.
enum class Magnitude { Squared, Absolute };

std::string_view to_string(Magnitude magnitude);
Magnitude parse_magnitude(std::string_view text);

struct InfluenceScores {
  Vector scores;
  bool normalized = false;
  std::string method = "filter";  // "filter", "phop" or "vector"
  ShiftKind kind = ShiftKind::Transition;
  int hops = 0;                   // phop only
  Magnitude magnitude = Magnitude::Squared;
  std::vector<Index> isolated;    // nodes whose score follows the zero-row convention
};

/// Influence of each node: the magnitude of (f - A f) at that node.
/// Under the transition kind an isolated node has an all-zero row, so its
/// score is f(i)^2 (it is listed in `isolated`).
InfluenceScores influence_scores(const Graph& graph, const Vector& signal, ShiftKind kind = ShiftKind::Transition,
                                 Magnitude magnitude = Magnitude::Squared);
InfluenceScores influence_scores(const ShiftOperator& op, const Vector& signal,
                                 Magnitude magnitude = Magnitude::Squared);

/// 0/1 pattern of (D^-1/2 W D^-1/2)^hops: entry (i, j) is set when some walk
/// of exactly `hops` edges joins i to j.
SparseMatrix hop_support(const Graph& graph, int hops);

/// p-hop variant. With P = hop_support(graph, p) and M the row counts of P:
///   f1 = (P f) / M,  g = f1 - (P f1) / M,  score = |g| / max |g|.
/// Rows with M = 0 contribute 0 to both averages. Values within rounding of
/// zero (relative to max |f|) are snapped to 0 before normalizing so that a
/// constant signal yields exactly zero scores.
InfluenceScores influence_scores_phop(const Graph& graph, const Vector& signal, int hops);

/// Vector-valued signal: score(i) = || row i of (F - A F) ||^2.
InfluenceScores influence_scores_vector(const Graph& graph, const Matrix& signal,
                                        ShiftKind kind = ShiftKind::Transition);

/// Divides by the maximum. An all-zero input is returned unchanged with
/// normalized = false.
InfluenceScores normalize_scores(InfluenceScores scores);

/// p(n) = score(n) / sum(scores). Throws Error if every score is zero.
Vector resampling_distribution(const InfluenceScores& scores);

/// Seeded draws from a discrete distribution over nodes.
class NodeSampler {
 public:
  NodeSampler(Vector probabilities, std::uint64_t seed);

  /// One draw with replacement.
  Index draw();

  /// `count` distinct nodes drawn sequentially, each draw proportional to the
  /// probabilities of the nodes not yet chosen. Once the positive mass is
  /// used up the remaining nodes are drawn uniformly.
  std::vector<Index> draw_without_replacement(Index count);

 private:
  Vector probabilities_;
  Vector cumulative_;
  Rng rng_;
};

/// Node ids sorted by descending value, ties by ascending id.
std::vector<Index> rank_descending(const Vector& values);
/// Node ids sorted by ascending value, ties by ascending id.
std::vector<Index> rank_ascending(const Vector& values);

}  // namespace margin
