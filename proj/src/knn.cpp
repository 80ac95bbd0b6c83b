#include "margin/knn.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "margin/error.hpp"
#include "margin/parallel.hpp"

namespace margin {

std::string_view to_string(Metric metric) { return metric == Metric::Euclidean ? "euclidean" : "cosine"; }

std::string_view to_string(Weighting weighting) { return weighting == Weighting::Binary ? "binary" : "gaussian"; }

Metric parse_metric(std::string_view text) {
  if (text == "euclidean") return Metric::Euclidean;
  if (text == "cosine") return Metric::Cosine;
  throw Error("unknown metric '" + std::string(text) + "' (expected euclidean or cosine)");
}

Weighting parse_weighting(std::string_view text) {
  if (text == "binary") return Weighting::Binary;
  if (text == "gaussian") return Weighting::Gaussian;
  throw Error("unknown weighting '" + std::string(text) + "' (expected binary or gaussian)");
}

double distance(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b,
                Metric metric) {
  const Index d = a.size();
  if (metric == Metric::Euclidean) {
    double sum = 0.0;
    for (Index j = 0; j < d; ++j) {
      const double diff = a[j] - b[j];
      sum += diff * diff;
    }
    return std::sqrt(sum);
  }
  double dot = 0.0, aa = 0.0, bb = 0.0;
  for (Index j = 0; j < d; ++j) {
    dot += a[j] * b[j];
    aa += a[j] * a[j];
    bb += b[j] * b[j];
  }
  if (aa == 0.0 || bb == 0.0) return 1.0;
  if (a == b) return 0.0;
  // Order the norm product so d(a,b) and d(b,a) agree bitwise.
  const double norms = std::sqrt(std::min(aa, bb)) * std::sqrt(std::max(aa, bb));
  return std::clamp(1.0 - dot / norms, 0.0, 2.0);
}

Matrix pairwise_distances(const Matrix& features, Metric metric) {
  const Index n = features.rows();
  if (n < 2) throw Error("pairwise distances need at least 2 samples, got " + std::to_string(n));
  require_finite(features);
  Matrix out = Matrix::Zero(n, n);
  parallel_for(0, n, [&](Index i) {
    for (Index j = i + 1; j < n; ++j) out(i, j) = distance(features.row(i), features.row(j), metric);
  });
  for (Index i = 0; i < n; ++i) {
    for (Index j = i + 1; j < n; ++j) out(j, i) = out(i, j);
  }
  return out;
}

double median(std::vector<double> values) {
  if (values.empty()) throw Error("median of an empty sample");
  const std::size_t mid = values.size() / 2;
  std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid), values.end());
  const double upper = values[mid];
  if (values.size() % 2 == 1) return upper;
  const double lower = *std::max_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lower + upper);
}

KnnGraph build_knn(const Matrix& features, const KnnConfig& config) {
  const Index n = features.rows();
  if (config.k < 1) throw Error("k must be at least 1, got " + std::to_string(config.k));
  if (config.k >= n) {
    throw Error("k = " + std::to_string(config.k) + " must be smaller than the sample count " + std::to_string(n));
  }
  if (config.bandwidth.fixed && !(*config.bandwidth.fixed > 0.0 && std::isfinite(*config.bandwidth.fixed))) {
    throw Error("fixed bandwidth must be positive and finite");
  }
  require_finite(features);

  const Index k = config.k;
  // selected(i, t): t-th nearest neighbor of i; chosen_distance likewise.
  Eigen::Matrix<Index, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> selected(n, k);
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> chosen_distance(n, k);
  parallel_for(0, n, [&](Index i) {
    std::vector<std::pair<double, Index>> candidates;
    candidates.reserve(static_cast<std::size_t>(n - 1));
    for (Index j = 0; j < n; ++j) {
      if (j != i) candidates.emplace_back(distance(features.row(i), features.row(j), config.metric), j);
    }
    // Lexicographic (distance, index) order breaks ties by lower index.
    std::partial_sort(candidates.begin(), candidates.begin() + k, candidates.end());
    for (Index t = 0; t < k; ++t) {
      selected(i, t) = candidates[static_cast<std::size_t>(t)].second;
      chosen_distance(i, t) = candidates[static_cast<std::size_t>(t)].first;
    }
  });

  std::optional<double> sigma;
  if (config.weighting == Weighting::Gaussian) {
    if (config.bandwidth.fixed) {
      sigma = *config.bandwidth.fixed;
    } else {
      std::vector<double> all(chosen_distance.data(), chosen_distance.data() + chosen_distance.size());
      double m = median(all);
      if (m <= 0.0) {
        // Mostly duplicate points: fall back to the smallest positive
        // selected distance, or 1 when every selected distance is zero.
        double smallest = std::numeric_limits<double>::infinity();
        for (double v : all) {
          if (v > 0.0) smallest = std::min(smallest, v);
        }
        m = std::isfinite(smallest) ? smallest : 1.0;
      }
      sigma = m;
    }
  }

  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(static_cast<std::size_t>(2 * n * k));
  for (Index i = 0; i < n; ++i) {
    for (Index t = 0; t < k; ++t) {
      const Index j = selected(i, t);
      double w = 1.0;
      if (sigma) {
        const double d = chosen_distance(i, t);
        // Clamp so that far neighbors keep a (tiny) positive weight instead
        // of silently disappearing from the graph.
        w = std::max(std::exp(-d * d / (2.0 * *sigma * *sigma)), std::numeric_limits<double>::min());
      }
      triplets.emplace_back(i, j, w);
      triplets.emplace_back(j, i, w);
    }
  }
  SparseMatrix w(n, n);
  // Both directions of a mutual pair carry the same weight, so keep one.
  w.setFromTriplets(triplets.begin(), triplets.end(), [](double a, double) { return a; });
  return {Graph(std::move(w)), sigma};
}

Graph build_knn_graph(const Matrix& features, const KnnConfig& config) { return build_knn(features, config).graph; }

Graph build_knn_graph(const Dataset& dataset, const KnnConfig& config) {
  dataset.check();
  return build_knn_graph(dataset.features, config);
}

}  // namespace margin
