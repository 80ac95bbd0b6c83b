#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "margin/dataset.hpp"
#include "margin/explain.hpp"
#include "margin/influence.hpp"
#include "margin/knn.hpp"

namespace margin {

/// How `scores` runs along `ids`: non-increasing, non-decreasing, or the
/// order in which a sampler produced the nodes.
enum class RankOrder { Descending, Ascending, Drawn };

std::string_view to_string(RankOrder order);

struct RankedSelection {
  std::vector<Index> ids;
  std::vector<double> scores;
  RankOrder order = RankOrder::Descending;
  nlohmann::json metadata = nlohmann::json::object();
  std::vector<std::string> warnings;

  Index size() const { return static_cast<Index>(ids.size()); }
};

/// Every node, by descending score (ties by id).
RankedSelection rank_by_influence(const Vector& scores);

/// Linear-interpolation percentile, q in [0, 100].
double percentile(const Vector& values, double q);

// ---- prototypes and criticisms ---------------------------------------------

enum class MmdMode { Global, Local };

struct PrototypeConfig {
  KnnConfig knn;
  KernelConfig kernel;
  MmdMode mode = MmdMode::Global;
  double threshold_percentile = 50.0;
  Index m_prototypes = 10;
  Index m_criticisms = 10;
  bool descending_prototypes = false;  // rank candidates by decreasing function value instead
  ShiftKind kind = ShiftKind::Transition;
};

struct PrototypeResult {
  RankedSelection prototypes;
  RankedSelection criticisms;
  NodeFunction function;
  InfluenceScores influence;
};

/// Criticisms are the m_c most influential nodes. Prototypes are drawn from
/// the remaining nodes whose influence is at or below the threshold
/// percentile, ordered by function value (ascending unless inverted).
PrototypeResult prototypes_criticisms(const Dataset& dataset, const PrototypeConfig& config);

/// Error rate of a 1-nearest-neighbor (euclidean) classifier trained on
/// `train` and evaluated on `test`.
double evaluate_1nn(const Dataset& train, const Dataset& test);

// ---- label noise -------------------------------------------------------------

struct CorruptedLabels {
  std::vector<int> labels;
  std::vector<bool> flipped;
};

/// Flips exactly round(beta * |class|) labels in each of the two classes,
/// chosen uniformly under `seed`.
CorruptedLabels corrupt_labels(std::span<const int> labels, double beta, std::uint64_t seed);

struct LabelRanking {
  RankedSelection ranking;
  NodeFunction distrust;
  InfluenceScores influence;
};

/// k-NN graph over the features, distrust of each label, influence, and all
/// nodes ranked by descending influence.
LabelRanking noisy_label_detection(const Matrix& features, std::span<const int> labels, const KnnConfig& knn,
                                   ShiftKind kind = ShiftKind::Transition);

/// Same computation on latent features, keeping the top_k nodes with a
/// positive score.
LabelRanking confusing_samples(const Matrix& latent_features, std::span<const int> labels, const KnnConfig& knn,
                               Index top_k, ShiftKind kind = ShiftKind::Transition);

/// Fraction of neighbors that agree with each node's label (1 - distrust),
/// using `labels` rather than the labels the ranking was built from.
Vector neighbor_agreement(const Graph& graph, std::span<const int> labels);

struct RecallCurve {
  std::vector<double> budgets;
  std::vector<double> recalls;
};

/// 0, 0.01, ..., 1.
std::vector<double> default_budget_grid();

/// Number of nodes inspected at budget fraction b: ceil(b * n), with
/// products within 1e-9 of an integer taken as that integer.
Index budget_count(double budget, Index n);

/// recall(b) = |top ceil(b n) of the ranking intersected with the flips| / |flips|.
/// The ranking must list every node once.
RecallCurve recall_curve(const RankedSelection& ranked, const std::vector<bool>& flipped,
                         std::span<const double> budgets);
RecallCurve recall_curve(const RankedSelection& ranked, const std::vector<bool>& flipped);

// ---- adversarial characterization ---------------------------------------------

enum class NodeFunctionKind { MmdGlobal, Kde };

std::string_view to_string(NodeFunctionKind kind);
NodeFunctionKind parse_node_function(std::string_view text);

struct GroupStats {
  Index count = 0;
  double mean = 0.0;
  double stddev = 0.0;  // population standard deviation
  std::vector<Index> histogram;
};

struct SeparationSummary {
  GroupStats flagged;
  GroupStats unflagged;
  std::vector<double> bin_edges;
  double auc = 0.5;         // P(score of flagged > score of unflagged), ties count 1/2
  double separation = 0.5;  // max(auc, 1 - auc)
  bool degenerate = false;  // only one group present
};

/// Area under the ROC curve of `scores` against `positive`, with mid-ranks
/// for ties.
double roc_auc(const Vector& scores, const std::vector<bool>& positive);

SeparationSummary summarize_separation(const Vector& scores, const std::vector<bool>& flags, Index bins);

struct KdeReference {
  std::map<int, Matrix> per_class;
  std::vector<int> predicted_labels;
};

struct AdversarialConfig {
  KnnConfig knn;
  NodeFunctionKind function = NodeFunctionKind::MmdGlobal;
  KernelConfig kernel;
  Index bins = 20;
  bool kde_log = false;
  ShiftKind kind = ShiftKind::Transition;
};

struct AdversarialResult {
  NodeFunction function;
  InfluenceScores influence;
  SeparationSummary margin_summary;
  SeparationSummary function_summary;
  std::vector<std::string> warnings;
};

AdversarialResult adversarial_characterization(const Dataset& dataset, const AdversarialConfig& config,
                                               const KdeReference* reference = nullptr);

// ---- sampling and saliency -----------------------------------------------------

enum class SamplingStrategy { Margin, Resampling, Random };

std::string_view to_string(SamplingStrategy strategy);
SamplingStrategy parse_sampling_strategy(std::string_view text);

/// Picks `budget` nodes: the most influential under the vector-signal
/// influence (margin), a seeded draw proportional to that influence
/// (resampling), or a seeded uniform draw (random).
RankedSelection ssl_sample_selection(const Matrix& embedding, const Graph& graph, Index budget,
                                     SamplingStrategy strategy, std::uint64_t seed,
                                     ShiftKind kind = ShiftKind::Transition);

/// Hadamard product of a saliency map and an influence map.
Vector combine_saliency(const Vector& saliency, const Vector& influence);

}  // namespace margin
