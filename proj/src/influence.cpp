#include "margin/influence.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "margin/dataset.hpp"
#include "margin/error.hpp"
#include "margin/parallel.hpp"

namespace margin {

std::string_view to_string(Magnitude magnitude) {
  return magnitude == Magnitude::Squared ? "squared" : "absolute";
}

Magnitude parse_magnitude(std::string_view text) {
  if (text == "squared") return Magnitude::Squared;
  if (text == "absolute") return Magnitude::Absolute;
  throw Error("unknown magnitude '" + std::string(text) + "' (expected squared or absolute)");
}

InfluenceScores influence_scores(const ShiftOperator& op, const Vector& signal, Magnitude magnitude) {
  require_finite(signal, "signal value");
  const Vector filtered = high_pass(op, signal);
  InfluenceScores out;
  out.kind = op.kind;
  out.magnitude = magnitude;
  out.scores = magnitude == Magnitude::Squared ? Vector(filtered.array().square()) : Vector(filtered.cwiseAbs());
  if (op.kind == ShiftKind::Transition) out.isolated = op.isolated;
  return out;
}

InfluenceScores influence_scores(const Graph& graph, const Vector& signal, ShiftKind kind, Magnitude magnitude) {
  if (signal.size() != graph.size()) {
    throw Error("signal has " + std::to_string(signal.size()) + " entries but the graph has " +
                std::to_string(graph.size()) + " nodes");
  }
  return influence_scores(shift_operator(graph, kind), signal, magnitude);
}

SparseMatrix hop_support(const Graph& graph, int hops) {
  if (hops < 1) throw Error("hop count must be at least 1, got " + std::to_string(hops));
  require_valid(graph);
  const Index n = graph.size();
  const auto& w = graph.adjacency();
  std::vector<std::vector<Index>> reach(static_cast<std::size_t>(n));
  parallel_for(0, n, [&](Index i) {
    std::vector<Index> frontier{i};
    std::vector<Index> next;
    for (int step = 0; step < hops && !frontier.empty(); ++step) {
      next.clear();
      for (Index j : frontier) {
        for (SparseMatrix::InnerIterator it(w, j); it; ++it) next.push_back(it.col());
      }
      std::sort(next.begin(), next.end());
      next.erase(std::unique(next.begin(), next.end()), next.end());
      frontier.swap(next);
    }
    reach[static_cast<std::size_t>(i)] = std::move(frontier);
  });

  std::vector<Eigen::Triplet<double>> triplets;
  for (Index i = 0; i < n; ++i) {
    for (Index j : reach[static_cast<std::size_t>(i)]) triplets.emplace_back(i, j, 1.0);
  }
  SparseMatrix support(n, n);
  support.setFromTriplets(triplets.begin(), triplets.end());
  support.makeCompressed();
  return support;
}

InfluenceScores influence_scores_phop(const Graph& graph, const Vector& signal, int hops) {
  if (signal.size() != graph.size()) {
    throw Error("signal has " + std::to_string(signal.size()) + " entries but the graph has " +
                std::to_string(graph.size()) + " nodes");
  }
  require_finite(signal, "signal value");
  const SparseMatrix support = hop_support(graph, hops);
  const Index n = graph.size();

  auto neighborhood_mean = [&](const Vector& x) {
    Vector out(n);
    parallel_for(0, n, [&](Index i) {
      double sum = 0.0;
      Index count = 0;
      for (SparseMatrix::InnerIterator it(support, i); it; ++it) {
        sum += x[it.col()];
        ++count;
      }
      out[i] = count > 0 ? sum / static_cast<double>(count) : 0.0;
    });
    return out;
  };

  const Vector smoothed = neighborhood_mean(signal);
  Vector filtered = (smoothed - neighborhood_mean(smoothed)).cwiseAbs();

  const double scale = n > 0 ? signal.cwiseAbs().maxCoeff() : 0.0;
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * scale;
  for (Index i = 0; i < n; ++i) {
    if (filtered[i] <= floor) filtered[i] = 0.0;
  }

  InfluenceScores out;
  out.scores = std::move(filtered);
  out.method = "phop";
  out.hops = hops;
  out.magnitude = Magnitude::Absolute;
  out.isolated = degree_info(graph).isolated;
  return normalize_scores(std::move(out));
}

InfluenceScores influence_scores_vector(const Graph& graph, const Matrix& signal, ShiftKind kind) {
  if (signal.rows() != graph.size()) {
    throw Error("signal has " + std::to_string(signal.rows()) + " rows but the graph has " +
                std::to_string(graph.size()) + " nodes");
  }
  require_finite(signal, "signal value");
  const auto op = shift_operator(graph, kind);
  const Matrix filtered = high_pass(op, signal);
  InfluenceScores out;
  out.method = "vector";
  out.kind = kind;
  out.scores = filtered.rowwise().squaredNorm();
  if (kind == ShiftKind::Transition) out.isolated = op.isolated;
  return out;
}

InfluenceScores normalize_scores(InfluenceScores scores) {
  if (scores.scores.size() == 0) return scores;
  if ((scores.scores.array() < 0.0).any()) throw Error("influence scores must be nonnegative");
  const double peak = scores.scores.maxCoeff();
  if (peak <= 0.0) {
    scores.normalized = false;
    return scores;
  }
  scores.scores /= peak;
  scores.normalized = true;
  return scores;
}

Vector resampling_distribution(const InfluenceScores& scores) {
  const Vector& s = scores.scores;
  if ((s.array() < 0.0).any()) throw Error("influence scores must be nonnegative");
  double total = 0.0;
  for (Index i = 0; i < s.size(); ++i) total += s[i];
  if (!(total > 0.0)) throw Error("all influence scores are zero; no sampling distribution exists");
  return s / total;
}

NodeSampler::NodeSampler(Vector probabilities, std::uint64_t seed)
    : probabilities_(std::move(probabilities)), rng_(seed) {
  if (probabilities_.size() == 0) throw Error("cannot sample from an empty distribution");
  if ((probabilities_.array() < 0.0).any() || !probabilities_.allFinite()) {
    throw Error("sampling probabilities must be finite and nonnegative");
  }
  cumulative_.resize(probabilities_.size());
  double running = 0.0;
  for (Index i = 0; i < probabilities_.size(); ++i) {
    running += probabilities_[i];
    cumulative_[i] = running;
  }
  if (!(running > 0.0)) throw Error("sampling probabilities sum to zero");
}

Index NodeSampler::draw() {
  const double total = cumulative_[cumulative_.size() - 1];
  const double target = rng_.uniform() * total;
  const double* begin = cumulative_.data();
  const double* end = begin + cumulative_.size();
  const double* hit = std::upper_bound(begin, end, target);
  Index idx = std::min<Index>(hit - begin, cumulative_.size() - 1);
  // Skip zero-probability nodes that share a cumulative value with their left neighbor.
  while (probabilities_[idx] == 0.0 && idx + 1 < cumulative_.size()) ++idx;
  return idx;
}

std::vector<Index> NodeSampler::draw_without_replacement(Index count) {
  const Index n = probabilities_.size();
  if (count < 0 || count > n) {
    throw Error("cannot draw " + std::to_string(count) + " distinct nodes from " + std::to_string(n));
  }
  Vector weights = probabilities_;
  std::vector<bool> taken(static_cast<std::size_t>(n), false);
  std::vector<Index> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<Index>(out.size()) < count) {
    double total = 0.0;
    for (Index i = 0; i < n; ++i) {
      if (!taken[static_cast<std::size_t>(i)]) total += weights[i];
    }
    Index chosen = -1;
    if (total > 0.0) {
      const double target = rng_.uniform() * total;
      double running = 0.0;
      for (Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)] || weights[i] == 0.0) continue;
        running += weights[i];
        chosen = i;
        if (target < running) break;
      }
    } else {
      Index pick = rng_.below(n - static_cast<Index>(out.size()));
      for (Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        if (pick-- == 0) {
          chosen = i;
          break;
        }
      }
    }
    taken[static_cast<std::size_t>(chosen)] = true;
    out.push_back(chosen);
  }
  return out;
}

std::vector<Index> rank_descending(const Vector& values) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values[a] > values[b]; });
  return order;
}

std::vector<Index> rank_ascending(const Vector& values) {
  std::vector<Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return values[a] < values[b]; });
  return order;
}

}  // namespace margin
