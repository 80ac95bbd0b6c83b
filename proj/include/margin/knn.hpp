#pragma once

#include <optional>
#include <string_view>

#include "margin/dataset.hpp"
#include "margin/graph.hpp"

namespace margin {

enum class Metric { Euclidean, Cosine };
enum class Weighting { Binary, Gaussian };

std::string_view to_string(Metric metric);
std::string_view to_string(Weighting weighting);
Metric parse_metric(std::string_view text);
Weighting parse_weighting(std::string_view text);

/// Either the median heuristic or a fixed positive value.
struct Bandwidth {
  std::optional<double> fixed;

  static Bandwidth median() { return {}; }
  static Bandwidth value(double sigma) { return {sigma}; }
  bool is_median() const { return !fixed.has_value(); }
};

struct KnnConfig {
  Index k = 20;
  Metric metric = Metric::Euclidean;
  Weighting weighting = Weighting::Binary;
  Bandwidth bandwidth;  // gaussian weighting only
};

/// Distance between two rows. Cosine distance is 1 - cos(a, b); a zero
/// vector is at distance 1 from everything, including another zero vector.
double distance(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b,
                Metric metric);

/// Dense symmetric distance matrix with a zero diagonal.
Matrix pairwise_distances(const Matrix& features, Metric metric);

struct KnnGraph {
  Graph graph;
  std::optional<double> sigma;  // resolved gaussian bandwidth
};

/// k-NN graph: each node selects its k nearest other nodes (ties broken by
/// lower index), and the selections are symmetrized by union. Gaussian
/// weights are exp(-d^2 / (2 sigma^2)) with sigma defaulting to the median of
/// all selected neighbor distances.
KnnGraph build_knn(const Matrix& features, const KnnConfig& config);

Graph build_knn_graph(const Matrix& features, const KnnConfig& config);
Graph build_knn_graph(const Dataset& dataset, const KnnConfig& config);

/// Median of a sample, averaging the two middle values for even sizes.
double median(std::vector<double> values);

}  // namespace margin
