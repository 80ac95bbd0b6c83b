#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "margin/graph.hpp"

namespace margin {

/// RBF kernel k(a, b) = exp(-|a - b|^2 / (2 sigma^2)). Without a fixed sigma
/// the bandwidth is the median pairwise euclidean distance of the relevant
/// samples.
struct KernelConfig {
  std::optional<double> sigma;

  static KernelConfig median_heuristic() { return {}; }
  static KernelConfig fixed(double value) { return {value}; }
};

enum class MmdEstimator { Biased, Unbiased };

struct MmdResult {
  double squared = 0.0;  // squared MMD estimate
  double value = 0.0;    // sqrt(max(squared, 0))
  double sigma = 0.0;    // bandwidth actually used
};

double rbf_kernel(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b,
                  double sigma);

/// Median pairwise euclidean distance between rows. Above `max_rows` rows an
/// evenly strided subset of rows is used. A zero median falls back to the
/// mean positive distance, and to 1 when all rows coincide.
double median_pairwise_distance(const Matrix& samples, Index max_rows = 2048);

/// Squared MMD between two sample sets (rows). The biased V-statistic is
///   mean k(a,a') + mean k(b,b') - 2 mean k(a,b)
/// over all ordered pairs, including a = a'; it is clamped at 0. The
/// unbiased variant drops the diagonal terms and needs two rows per set.
MmdResult mmd(const Matrix& set_a, const Matrix& set_b, const KernelConfig& kernel = {},
              MmdEstimator estimator = MmdEstimator::Biased);

/// A real-valued function on graph nodes plus bookkeeping about nodes where
/// the function had to fall back to a substitute value.
struct NodeFunction {
  Vector values;
  std::vector<Index> flagged;
  double sigma = 0.0;
  std::string note;
};

/// f(i) = MMD^2(Xbar, Xbar + {x_i}) with Xbar every sample except i and its
/// graph neighbors. When Xbar is empty the node is flagged and receives the
/// maximum over the other nodes. A median-heuristic bandwidth is resolved
/// once over the whole dataset.
NodeFunction mmd_global_function(const Matrix& features, const Graph& graph, const KernelConfig& kernel = {});

/// As mmd_global_function, with both sets restricted to node i's class.
/// Degenerate nodes take the maximum over valid nodes of the same class.
NodeFunction mmd_local_function(const Matrix& features, std::span<const int> labels, const Graph& graph,
                                const KernelConfig& kernel = {});

/// f(i) = 1 - (# neighbors sharing i's label) / (# neighbors).
/// Isolated nodes get 0 and are flagged.
NodeFunction distrust_function(const Graph& graph, std::span<const int> labels);

/// Kernel density of each query row against the reference samples of its
/// predicted class: mean_r k(x_i, r), or its logarithm when log_density is
/// set. Without a fixed sigma the bandwidth is the median heuristic over all
/// reference rows.
NodeFunction kde_scores(const Matrix& query, const std::map<int, Matrix>& reference,
                        std::span<const int> predicted_labels, const KernelConfig& kernel = {},
                        bool log_density = false);

/// f(i) = size(i) / max(size).
Vector sparsity_ratio_function(const Vector& sizes);

}  // namespace margin
