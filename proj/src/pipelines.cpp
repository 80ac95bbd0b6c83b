#include "margin/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>

#include "margin/error.hpp"
#include "margin/rng.hpp"

namespace margin {
namespace {

RankedSelection take_ranked(const std::vector<Index>& order, const Vector& scores, Index count, RankOrder dir) {
  RankedSelection out;
  out.order = dir;
  for (Index t = 0; t < count; ++t) {
    const Index id = order[static_cast<std::size_t>(t)];
    out.ids.push_back(id);
    out.scores.push_back(scores[id]);
  }
  return out;
}

GroupStats group_stats(std::vector<double> values, const std::vector<double>& edges) {
  GroupStats stats;
  stats.count = static_cast<Index>(values.size());
  stats.histogram.assign(edges.empty() ? 0 : edges.size() - 1, 0);
  if (values.empty()) return stats;
  // Sorting first makes the sums independent of input row order.
  std::sort(values.begin(), values.end());
  double sum = 0.0;
  for (double v : values) sum += v;
  stats.mean = sum / static_cast<double>(values.size());
  double ss = 0.0;
  for (double v : values) ss += (v - stats.mean) * (v - stats.mean);
  stats.stddev = std::sqrt(ss / static_cast<double>(values.size()));
  const auto bins = static_cast<Index>(stats.histogram.size());
  if (bins == 0) return stats;
  const double lo = edges.front();
  const double hi = edges.back();
  for (double v : values) {
    Index bin = 0;
    if (hi > lo) bin = std::min(bins - 1, static_cast<Index>(std::floor((v - lo) / (hi - lo) * static_cast<double>(bins))));
    stats.histogram[static_cast<std::size_t>(std::max<Index>(bin, 0))]++;
  }
  return stats;
}

void require_labels(std::span<const int> labels, Index n) {
  if (static_cast<Index>(labels.size()) != n) {
    throw Error("labels have " + std::to_string(labels.size()) + " rows but the dataset has " + std::to_string(n));
  }
}

}  // namespace

std::string_view to_string(RankOrder order) {
  switch (order) {
    case RankOrder::Descending: return "descending";
    case RankOrder::Ascending: return "ascending";
    case RankOrder::Drawn: return "drawn";
  }
  return "unknown";
}

RankedSelection rank_by_influence(const Vector& scores) {
  return take_ranked(rank_descending(scores), scores, scores.size(), RankOrder::Descending);
}

double percentile(const Vector& values, double q) {
  if (values.size() == 0) throw Error("percentile of an empty sample");
  if (!(q >= 0.0 && q <= 100.0)) throw Error("percentile must lie in [0, 100]");
  std::vector<double> sorted(values.data(), values.data() + values.size());
  std::sort(sorted.begin(), sorted.end());
  const double pos = q / 100.0 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

PrototypeResult prototypes_criticisms(const Dataset& dataset, const PrototypeConfig& config) {
  dataset.check();
  const Index n = dataset.size();
  if (config.m_prototypes < 0 || config.m_criticisms < 0) throw Error("selection sizes must be nonnegative");
  if (config.m_prototypes + config.m_criticisms > n) {
    throw Error("m_prototypes + m_criticisms = " + std::to_string(config.m_prototypes + config.m_criticisms) +
                " exceeds the sample count " + std::to_string(n));
  }
  const Graph graph = build_knn_graph(dataset.features, config.knn);

  PrototypeResult out;
  if (config.mode == MmdMode::Local) {
    if (!dataset.labels) throw Error("local MMD mode needs labels");
    out.function = mmd_local_function(dataset.features, *dataset.labels, graph, config.kernel);
  } else {
    out.function = mmd_global_function(dataset.features, graph, config.kernel);
  }
  out.influence = influence_scores(graph, out.function.values, config.kind);
  const Vector& influence = out.influence.scores;

  const auto by_influence = rank_descending(influence);
  out.criticisms = take_ranked(by_influence, influence, config.m_criticisms, RankOrder::Descending);

  std::vector<bool> is_criticism(static_cast<std::size_t>(n), false);
  for (Index id : out.criticisms.ids) is_criticism[static_cast<std::size_t>(id)] = true;
  const double cutoff = percentile(influence, config.threshold_percentile);
  std::vector<Index> candidates;
  for (Index i = 0; i < n; ++i) {
    if (!is_criticism[static_cast<std::size_t>(i)] && influence[i] <= cutoff) candidates.push_back(i);
  }
  const Vector& f = out.function.values;
  std::stable_sort(candidates.begin(), candidates.end(), [&](Index a, Index b) {
    return config.descending_prototypes ? f[a] > f[b] : f[a] < f[b];
  });
  Index m_p = config.m_prototypes;
  if (static_cast<Index>(candidates.size()) < m_p) {
    out.prototypes.warnings.push_back("only " + std::to_string(candidates.size()) +
                                      " nodes fall under the influence threshold; selecting " +
                                      std::to_string(candidates.size()) + " prototypes instead of " +
                                      std::to_string(m_p));
    m_p = static_cast<Index>(candidates.size());
  }
  const RankOrder dir = config.descending_prototypes ? RankOrder::Descending : RankOrder::Ascending;
  auto prototypes = take_ranked(candidates, f, m_p, dir);
  prototypes.warnings = std::move(out.prototypes.warnings);
  out.prototypes = std::move(prototypes);

  const char* mode = config.mode == MmdMode::Local ? "local" : "global";
  out.prototypes.metadata = {{"task", "prototypes"},
                             {"mode", mode},
                             {"score", "mmd_function"},
                             {"threshold_percentile", config.threshold_percentile},
                             {"influence_cutoff", cutoff}};
  out.criticisms.metadata = {{"task", "criticisms"}, {"mode", mode}, {"score", "influence"}};
  return out;
}

double evaluate_1nn(const Dataset& train, const Dataset& test) {
  if (train.size() == 0 || test.size() == 0) throw Error("1-NN evaluation needs non-empty train and test sets");
  if (!train.labels || !test.labels) throw Error("1-NN evaluation needs labels on both sets");
  if (train.dims() != test.dims()) throw Error("train and test sets have different feature dimensions");
  train.check();
  test.check();
  Index errors = 0;
  for (Index t = 0; t < test.size(); ++t) {
    Index best = 0;
    double best_distance = std::numeric_limits<double>::infinity();
    for (Index r = 0; r < train.size(); ++r) {
      const double d = (train.features.row(r) - test.features.row(t)).squaredNorm();
      if (d < best_distance) {
        best_distance = d;
        best = r;
      }
    }
    if ((*train.labels)[static_cast<std::size_t>(best)] != (*test.labels)[static_cast<std::size_t>(t)]) ++errors;
  }
  return static_cast<double>(errors) / static_cast<double>(test.size());
}

CorruptedLabels corrupt_labels(std::span<const int> labels, double beta, std::uint64_t seed) {
  if (!(beta > 0.0 && beta < 0.5)) throw Error("flip fraction beta must lie in (0, 0.5)");
  std::map<int, std::vector<Index>> members;
  for (std::size_t i = 0; i < labels.size(); ++i) members[labels[i]].push_back(static_cast<Index>(i));
  if (members.size() != 2) {
    throw Error("label corruption needs exactly two classes, found " + std::to_string(members.size()));
  }
  const int first = members.begin()->first;
  const int second = std::next(members.begin())->first;

  CorruptedLabels out;
  out.labels.assign(labels.begin(), labels.end());
  out.flipped.assign(labels.size(), false);
  Rng rng(seed);
  for (auto& [label, rows] : members) {
    const auto flips = static_cast<Index>(std::llround(beta * static_cast<double>(rows.size())));
    const auto size = static_cast<Index>(rows.size());
    // Partial Fisher-Yates: the first `flips` slots become a uniform subset.
    for (Index t = 0; t < flips; ++t) {
      const Index pick = t + rng.below(size - t);
      std::swap(rows[static_cast<std::size_t>(t)], rows[static_cast<std::size_t>(pick)]);
      const auto row = static_cast<std::size_t>(rows[static_cast<std::size_t>(t)]);
      out.labels[row] = label == first ? second : first;
      out.flipped[row] = true;
    }
  }
  return out;
}

Vector neighbor_agreement(const Graph& graph, std::span<const int> labels) {
  const auto distrust = distrust_function(graph, labels);
  Vector agreement = Vector::Ones(graph.size()) - distrust.values;
  for (Index i : distrust.flagged) agreement[i] = 0.0;
  return agreement;
}

LabelRanking noisy_label_detection(const Matrix& features, std::span<const int> labels, const KnnConfig& knn,
                                   ShiftKind kind) {
  require_labels(labels, features.rows());
  const Graph graph = build_knn_graph(features, knn);
  LabelRanking out;
  out.distrust = distrust_function(graph, labels);
  out.influence = influence_scores(graph, out.distrust.values, kind);
  out.ranking = rank_by_influence(out.influence.scores);
  out.ranking.metadata = {{"task", "noisy_labels"}, {"k", knn.k}, {"operator", to_string(kind)}};
  return out;
}

LabelRanking confusing_samples(const Matrix& latent_features, std::span<const int> labels, const KnnConfig& knn,
                               Index top_k, ShiftKind kind) {
  if (top_k < 1) throw Error("top_k must be at least 1");
  auto out = noisy_label_detection(latent_features, labels, knn, kind);
  const Index n = latent_features.rows();
  std::vector<std::string> warnings;
  if (top_k > n) {
    warnings.push_back("top_k = " + std::to_string(top_k) + " exceeds the sample count; clipped to " +
                       std::to_string(n));
    top_k = n;
  }
  RankedSelection selected;
  selected.order = RankOrder::Descending;
  for (std::size_t t = 0; t < out.ranking.ids.size() && selected.size() < top_k; ++t) {
    if (out.ranking.scores[t] <= 0.0) break;
    selected.ids.push_back(out.ranking.ids[t]);
    selected.scores.push_back(out.ranking.scores[t]);
  }
  if (selected.ids.empty()) warnings.push_back("no node has a positive score; the samples are not confusing");
  selected.warnings = std::move(warnings);
  selected.metadata = {{"task", "confusing"}, {"k", knn.k}, {"top_k", top_k}, {"operator", to_string(kind)}};
  out.ranking = std::move(selected);
  return out;
}

std::vector<double> default_budget_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 100; ++i) grid.push_back(static_cast<double>(i) / 100.0);
  return grid;
}

Index budget_count(double budget, Index n) {
  const double exact = budget * static_cast<double>(n);
  const double nearest = std::round(exact);
  const double count = std::abs(exact - nearest) < 1e-9 ? nearest : std::ceil(exact);
  return std::clamp(static_cast<Index>(count), Index{0}, n);
}

RecallCurve recall_curve(const RankedSelection& ranked, const std::vector<bool>& flipped,
                         std::span<const double> budgets) {
  const auto n = static_cast<Index>(flipped.size());
  if (ranked.size() != n) {
    throw Error("ranking lists " + std::to_string(ranked.size()) + " nodes but the flip mask has " +
                std::to_string(n));
  }
  std::vector<bool> seen(flipped.size(), false);
  for (Index id : ranked.ids) {
    if (id < 0 || id >= n || seen[static_cast<std::size_t>(id)]) throw Error("ranking is not a permutation of the nodes");
    seen[static_cast<std::size_t>(id)] = true;
  }
  const auto total = static_cast<Index>(std::count(flipped.begin(), flipped.end(), true));
  if (total == 0) throw Error("recall is undefined without any flipped labels");

  // hits[t] = flips among the first t ranked nodes.
  std::vector<Index> hits(static_cast<std::size_t>(n + 1), 0);
  for (Index t = 0; t < n; ++t) {
    hits[static_cast<std::size_t>(t + 1)] =
        hits[static_cast<std::size_t>(t)] + (flipped[static_cast<std::size_t>(ranked.ids[static_cast<std::size_t>(t)])] ? 1 : 0);
  }
  RecallCurve curve;
  for (double b : budgets) {
    if (!(b >= 0.0 && b <= 1.0)) throw Error("budget fractions must lie in [0, 1]");
    curve.budgets.push_back(b);
    curve.recalls.push_back(static_cast<double>(hits[static_cast<std::size_t>(budget_count(b, n))]) /
                            static_cast<double>(total));
  }
  return curve;
}

RecallCurve recall_curve(const RankedSelection& ranked, const std::vector<bool>& flipped) {
  const auto grid = default_budget_grid();
  return recall_curve(ranked, flipped, grid);
}

std::string_view to_string(NodeFunctionKind kind) { return kind == NodeFunctionKind::MmdGlobal ? "mmd_global" : "kde"; }

NodeFunctionKind parse_node_function(std::string_view text) {
  if (text == "mmd_global") return NodeFunctionKind::MmdGlobal;
  if (text == "kde") return NodeFunctionKind::Kde;
  throw Error("unknown function '" + std::string(text) + "' (expected mmd_global or kde)");
}

double roc_auc(const Vector& scores, const std::vector<bool>& positive) {
  const Index n = scores.size();
  if (static_cast<Index>(positive.size()) != n) throw Error("scores and flags differ in length");
  const auto order = rank_ascending(scores);
  double positive_rank_sum = 0.0;
  Index positives = 0;
  Index t = 0;
  while (t < n) {
    Index end = t;
    while (end + 1 < n && scores[order[static_cast<std::size_t>(end + 1)]] == scores[order[static_cast<std::size_t>(t)]]) ++end;
    const double mid_rank = 0.5 * static_cast<double>(t + end) + 1.0;
    for (Index u = t; u <= end; ++u) {
      if (positive[static_cast<std::size_t>(order[static_cast<std::size_t>(u)])]) {
        positive_rank_sum += mid_rank;
        ++positives;
      }
    }
    t = end + 1;
  }
  const Index negatives = n - positives;
  if (positives == 0 || negatives == 0) return 0.5;
  const double p = static_cast<double>(positives);
  return (positive_rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

SeparationSummary summarize_separation(const Vector& scores, const std::vector<bool>& flags, Index bins) {
  if (static_cast<Index>(flags.size()) != scores.size()) throw Error("scores and flags differ in length");
  if (bins < 1) throw Error("histogram needs at least one bin");
  SeparationSummary summary;
  std::vector<double> flagged, unflagged;
  for (Index i = 0; i < scores.size(); ++i) (flags[static_cast<std::size_t>(i)] ? flagged : unflagged).push_back(scores[i]);
  double lo = 0.0, hi = 0.0;
  if (scores.size() > 0) {
    lo = scores.minCoeff();
    hi = scores.maxCoeff();
  }
  for (Index b = 0; b <= bins; ++b) {
    summary.bin_edges.push_back(b == bins ? hi : lo + (hi - lo) * static_cast<double>(b) / static_cast<double>(bins));
  }
  summary.flagged = group_stats(std::move(flagged), summary.bin_edges);
  summary.unflagged = group_stats(std::move(unflagged), summary.bin_edges);
  summary.degenerate = summary.flagged.count == 0 || summary.unflagged.count == 0;
  summary.auc = roc_auc(scores, flags);
  summary.separation = std::max(summary.auc, 1.0 - summary.auc);
  return summary;
}

AdversarialResult adversarial_characterization(const Dataset& dataset, const AdversarialConfig& config,
                                               const KdeReference* reference) {
  dataset.check();
  if (!dataset.flags) throw Error("adversarial characterization needs per-sample flags");
  const Graph graph = build_knn_graph(dataset.features, config.knn);

  AdversarialResult out;
  if (config.function == NodeFunctionKind::MmdGlobal) {
    out.function = mmd_global_function(dataset.features, graph, config.kernel);
  } else {
    if (reference == nullptr) throw Error("the kde function needs reference samples and predicted labels");
    out.function = kde_scores(dataset.features, reference->per_class, reference->predicted_labels, config.kernel,
                              config.kde_log);
  }
  out.influence = influence_scores(graph, out.function.values, config.kind);
  out.margin_summary = summarize_separation(out.influence.scores, *dataset.flags, config.bins);
  out.function_summary = summarize_separation(out.function.values, *dataset.flags, config.bins);
  if (out.margin_summary.degenerate) {
    out.warnings.push_back("only one group is present; separation statistics are degenerate");
  }
  return out;
}

std::string_view to_string(SamplingStrategy strategy) {
  switch (strategy) {
    case SamplingStrategy::Margin: return "margin";
    case SamplingStrategy::Resampling: return "resampling";
    case SamplingStrategy::Random: return "random";
  }
  return "unknown";
}

SamplingStrategy parse_sampling_strategy(std::string_view text) {
  if (text == "margin") return SamplingStrategy::Margin;
  if (text == "resampling") return SamplingStrategy::Resampling;
  if (text == "random") return SamplingStrategy::Random;
  throw Error("unknown sampling strategy '" + std::string(text) + "' (expected margin, resampling or random)");
}

RankedSelection ssl_sample_selection(const Matrix& embedding, const Graph& graph, Index budget,
                                     SamplingStrategy strategy, std::uint64_t seed, ShiftKind kind) {
  const Index n = graph.size();
  if (budget < 1) throw Error("sampling budget must be at least 1");
  if (budget > n) {
    throw Error("sampling budget " + std::to_string(budget) + " exceeds the node count " + std::to_string(n));
  }
  const auto influence = influence_scores_vector(graph, embedding, kind);
  RankedSelection out;
  switch (strategy) {
    case SamplingStrategy::Margin:
      out = take_ranked(rank_descending(influence.scores), influence.scores, budget, RankOrder::Descending);
      break;
    case SamplingStrategy::Resampling: {
      NodeSampler sampler(resampling_distribution(influence), seed);
      out = take_ranked(sampler.draw_without_replacement(budget), influence.scores, budget, RankOrder::Drawn);
      break;
    }
    case SamplingStrategy::Random: {
      NodeSampler sampler(Vector::Ones(n), seed);
      out = take_ranked(sampler.draw_without_replacement(budget), influence.scores, budget, RankOrder::Drawn);
      break;
    }
  }
  out.metadata = {{"task", "sample"}, {"strategy", to_string(strategy)}, {"budget", budget},
                  {"operator", to_string(kind)}};
  return out;
}

Vector combine_saliency(const Vector& saliency, const Vector& influence) {
  if (saliency.size() != influence.size()) {
    throw Error("saliency has " + std::to_string(saliency.size()) + " entries but influence has " +
                std::to_string(influence.size()));
  }
  if ((saliency.array() < 0.0).any() || (influence.array() < 0.0).any()) {
    throw Error("saliency and influence maps must be nonnegative");
  }
  return saliency.cwiseProduct(influence);
}

}  // namespace margin
