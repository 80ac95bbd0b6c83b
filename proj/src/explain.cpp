#include "margin/explain.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "margin/error.hpp"
#include "margin/knn.hpp"
#include "margin/parallel.hpp"

namespace margin {
namespace {

double squared_distance(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b) {
  double sum = 0.0;
  for (Index j = 0; j < a.size(); ++j) {
    const double diff = a[j] - b[j];
    sum += diff * diff;
  }
  return sum;
}

double resolve_sigma(const KernelConfig& kernel, const Matrix& samples) {
  if (kernel.sigma) {
    if (!(*kernel.sigma > 0.0) || !std::isfinite(*kernel.sigma)) throw Error("kernel bandwidth must be positive");
    return *kernel.sigma;
  }
  return median_pairwise_distance(samples);
}

// Leave-neighborhood-out MMD for one node, given kernel row sums restricted
// to the node's pool (the whole dataset, or its class).
//   pool_total : sum of k over all ordered pairs of the pool
//   row_sum[a] : sum of k(a, b) over b in the pool
//   removed    : i and its neighbors that belong to the pool (includes i)
// Returns nullopt when nothing is left after removal.
std::optional<double> leave_out_mmd(const Matrix& x, Index node, double pool_total, Index pool_size,
                                    const Vector& row_sum, const std::vector<Index>& removed, double sigma) {
  const Index m = pool_size - static_cast<Index>(removed.size());
  if (m <= 0) return std::nullopt;
  double removed_rows = 0.0;
  double removed_block = 0.0;
  double to_node = 0.0;
  for (Index a : removed) {
    removed_rows += row_sum[a];
    for (Index b : removed) removed_block += rbf_kernel(x.row(a), x.row(b), sigma);
    to_node += rbf_kernel(x.row(a), x.row(node), sigma);
  }
  const double kept_block = pool_total - 2.0 * removed_rows + removed_block;
  const double kept_to_node = row_sum[node] - to_node;
  const double md = static_cast<double>(m);
  // For Xbar of size m and Y = Xbar + {x}, the biased estimate collapses to
  //   (mean_Xbar k - 2 mean_Xbar k(., x) + k(x, x)) / (m + 1)^2.
  const double gap = kept_block / (md * md) - 2.0 * kept_to_node / md + 1.0;
  return std::max(gap, 0.0) / ((md + 1.0) * (md + 1.0));
}

std::vector<Index> removal_set(const Graph& graph, Index node) {
  std::vector<Index> removed = graph.neighbors(node);
  removed.push_back(node);
  std::sort(removed.begin(), removed.end());
  removed.erase(std::unique(removed.begin(), removed.end()), removed.end());
  return removed;
}

void check_inputs(const Matrix& features, const Graph& graph) {
  if (features.rows() != graph.size()) {
    throw Error("dataset has " + std::to_string(features.rows()) + " rows but the graph has " +
                std::to_string(graph.size()) + " nodes");
  }
  require_finite(features);
  require_valid(graph);
}

}  // namespace

double rbf_kernel(const Eigen::Ref<const Eigen::RowVectorXd>& a, const Eigen::Ref<const Eigen::RowVectorXd>& b,
                  double sigma) {
  return std::exp(-squared_distance(a, b) / (2.0 * sigma * sigma));
}

double median_pairwise_distance(const Matrix& samples, Index max_rows) {
  const Index n = samples.rows();
  if (n < 2) return 1.0;
  std::vector<Index> rows;
  if (n <= max_rows) {
    for (Index i = 0; i < n; ++i) rows.push_back(i);
  } else {
    for (Index i = 0; i < max_rows; ++i) rows.push_back(i * n / max_rows);
  }
  const auto count = static_cast<Index>(rows.size());
  std::vector<double> distances;
  distances.reserve(static_cast<std::size_t>(count * (count - 1) / 2));
  for (Index i = 0; i < count; ++i) {
    for (Index j = i + 1; j < count; ++j) {
      distances.push_back(std::sqrt(squared_distance(samples.row(rows[static_cast<std::size_t>(i)]),
                                                     samples.row(rows[static_cast<std::size_t>(j)]))));
    }
  }
  const double med = median(distances);
  if (med > 0.0) return med;
  double sum = 0.0;
  Index positive = 0;
  for (double d : distances) {
    if (d > 0.0) {
      sum += d;
      ++positive;
    }
  }
  return positive > 0 ? sum / static_cast<double>(positive) : 1.0;
}

MmdResult mmd(const Matrix& set_a, const Matrix& set_b, const KernelConfig& kernel, MmdEstimator estimator) {
  if (set_a.rows() == 0 || set_b.rows() == 0) throw Error("MMD needs two non-empty sample sets");
  if (set_a.cols() != set_b.cols()) throw Error("MMD sample sets have different dimensions");
  require_finite(set_a);
  require_finite(set_b);
  const Index n = set_a.rows();
  const Index m = set_b.rows();
  if (estimator == MmdEstimator::Unbiased && (n < 2 || m < 2)) {
    throw Error("the unbiased MMD estimator needs at least two samples per set");
  }

  MmdResult result;
  if (kernel.sigma) {
    result.sigma = resolve_sigma(kernel, set_a);
  } else {
    Matrix both(n + m, set_a.cols());
    both << set_a, set_b;
    result.sigma = median_pairwise_distance(both);
  }
  const double sigma = result.sigma;

  auto block_sum = [&](const Matrix& x, const Matrix& y, bool skip_diagonal) {
    double sum = 0.0;
    for (Index i = 0; i < x.rows(); ++i) {
      for (Index j = 0; j < y.rows(); ++j) {
        if (skip_diagonal && i == j) continue;
        sum += rbf_kernel(x.row(i), y.row(j), sigma);
      }
    }
    return sum;
  };

  const double nd = static_cast<double>(n);
  const double md = static_cast<double>(m);
  if (estimator == MmdEstimator::Biased) {
    result.squared = block_sum(set_a, set_a, false) / (nd * nd) + block_sum(set_b, set_b, false) / (md * md) -
                     2.0 * block_sum(set_a, set_b, false) / (nd * md);
    result.squared = std::max(result.squared, 0.0);
  } else {
    result.squared = block_sum(set_a, set_a, true) / (nd * (nd - 1.0)) +
                     block_sum(set_b, set_b, true) / (md * (md - 1.0)) -
                     2.0 * block_sum(set_a, set_b, false) / (nd * md);
  }
  result.value = std::sqrt(std::max(result.squared, 0.0));
  return result;
}

NodeFunction mmd_global_function(const Matrix& features, const Graph& graph, const KernelConfig& kernel) {
  check_inputs(features, graph);
  const Index n = features.rows();
  NodeFunction out;
  out.sigma = resolve_sigma(kernel, features);
  const double sigma = out.sigma;

  Vector row_sum(n);
  parallel_for(0, n, [&](Index i) {
    double sum = 0.0;
    for (Index j = 0; j < n; ++j) sum += rbf_kernel(features.row(i), features.row(j), sigma);
    row_sum[i] = sum;
  });
  double total = 0.0;
  for (Index i = 0; i < n; ++i) total += row_sum[i];

  std::vector<std::optional<double>> raw(static_cast<std::size_t>(n));
  parallel_for(0, n, [&](Index i) {
    raw[static_cast<std::size_t>(i)] = leave_out_mmd(features, i, total, n, row_sum, removal_set(graph, i), sigma);
  });

  double best = 0.0;
  for (const auto& v : raw) {
    if (v) best = std::max(best, *v);
  }
  out.values.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& v = raw[static_cast<std::size_t>(i)];
    if (v) {
      out.values[i] = *v;
    } else {
      out.values[i] = best;
      out.flagged.push_back(i);
    }
  }
  if (!out.flagged.empty()) out.note = "nodes whose neighborhood covers the dataset take the maximum valid value";
  return out;
}

NodeFunction mmd_local_function(const Matrix& features, std::span<const int> labels, const Graph& graph,
                                const KernelConfig& kernel) {
  check_inputs(features, graph);
  const Index n = features.rows();
  if (static_cast<Index>(labels.size()) != n) {
    throw Error("labels have " + std::to_string(labels.size()) + " rows but the dataset has " + std::to_string(n));
  }
  NodeFunction out;
  out.sigma = resolve_sigma(kernel, features);
  const double sigma = out.sigma;

  std::map<int, std::vector<Index>> members;
  for (Index i = 0; i < n; ++i) members[labels[static_cast<std::size_t>(i)]].push_back(i);

  Vector row_sum(n);
  parallel_for(0, n, [&](Index i) {
    double sum = 0.0;
    for (Index j : members.at(labels[static_cast<std::size_t>(i)])) {
      sum += rbf_kernel(features.row(i), features.row(j), sigma);
    }
    row_sum[i] = sum;
  });
  std::map<int, double> class_total;
  for (const auto& [label, rows] : members) {
    double total = 0.0;
    for (Index i : rows) total += row_sum[i];
    class_total[label] = total;
  }

  std::vector<std::optional<double>> raw(static_cast<std::size_t>(n));
  parallel_for(0, n, [&](Index i) {
    const int label = labels[static_cast<std::size_t>(i)];
    std::vector<Index> removed;
    for (Index j : removal_set(graph, i)) {
      if (labels[static_cast<std::size_t>(j)] == label) removed.push_back(j);
    }
    const auto pool = static_cast<Index>(members.at(label).size());
    raw[static_cast<std::size_t>(i)] =
        leave_out_mmd(features, i, class_total.at(label), pool, row_sum, removed, sigma);
  });

  double global_best = 0.0;
  std::map<int, double> class_best;
  for (Index i = 0; i < n; ++i) {
    const auto& v = raw[static_cast<std::size_t>(i)];
    if (!v) continue;
    global_best = std::max(global_best, *v);
    auto& best = class_best[labels[static_cast<std::size_t>(i)]];
    best = std::max(best, *v);
  }
  out.values.resize(n);
  for (Index i = 0; i < n; ++i) {
    const auto& v = raw[static_cast<std::size_t>(i)];
    if (v) {
      out.values[i] = *v;
      continue;
    }
    const auto it = class_best.find(labels[static_cast<std::size_t>(i)]);
    out.values[i] = it != class_best.end() ? it->second : global_best;
    out.flagged.push_back(i);
  }
  if (!out.flagged.empty()) {
    out.note = "nodes with no same-class samples left after removal take their class maximum";
  }
  return out;
}

NodeFunction distrust_function(const Graph& graph, std::span<const int> labels) {
  require_valid(graph);
  const Index n = graph.size();
  if (static_cast<Index>(labels.size()) != n) {
    throw Error("labels have " + std::to_string(labels.size()) + " entries but the graph has " + std::to_string(n) +
                " nodes");
  }
  NodeFunction out;
  out.values = Vector::Zero(n);
  const auto& w = graph.adjacency();
  for (Index i = 0; i < n; ++i) {
    Index neighbors = 0;
    Index agree = 0;
    for (SparseMatrix::InnerIterator it(w, i); it; ++it) {
      if (it.col() == i) continue;
      ++neighbors;
      if (labels[static_cast<std::size_t>(it.col())] == labels[static_cast<std::size_t>(i)]) ++agree;
    }
    if (neighbors == 0) {
      out.flagged.push_back(i);
      continue;
    }
    out.values[i] = 1.0 - static_cast<double>(agree) / static_cast<double>(neighbors);
  }
  if (!out.flagged.empty()) out.note = "isolated nodes have distrust 0";
  return out;
}

NodeFunction kde_scores(const Matrix& query, const std::map<int, Matrix>& reference,
                        std::span<const int> predicted_labels, const KernelConfig& kernel, bool log_density) {
  const Index n = query.rows();
  if (static_cast<Index>(predicted_labels.size()) != n) {
    throw Error("predicted labels have " + std::to_string(predicted_labels.size()) + " entries but there are " +
                std::to_string(n) + " query samples");
  }
  require_finite(query);
  Index reference_rows = 0;
  for (const auto& [label, samples] : reference) {
    if (samples.cols() != query.cols()) {
      throw Error("reference class " + std::to_string(label) + " has a different feature dimension");
    }
    require_finite(samples, "reference feature");
    reference_rows += samples.rows();
  }
  for (Index i = 0; i < n; ++i) {
    const int label = predicted_labels[static_cast<std::size_t>(i)];
    const auto it = reference.find(label);
    if (it == reference.end() || it->second.rows() == 0) {
      throw Error("no reference samples for predicted class " + std::to_string(label) + " (query row " +
                  std::to_string(i) + ")");
    }
  }

  NodeFunction out;
  if (kernel.sigma) {
    out.sigma = resolve_sigma(kernel, query);
  } else {
    Matrix stacked(reference_rows, query.cols());
    Index offset = 0;
    for (const auto& [label, samples] : reference) {
      stacked.middleRows(offset, samples.rows()) = samples;
      offset += samples.rows();
    }
    out.sigma = median_pairwise_distance(stacked);
  }
  const double scale = 2.0 * out.sigma * out.sigma;

  out.values.resize(n);
  parallel_for(0, n, [&](Index i) {
    const Matrix& ref = reference.at(predicted_labels[static_cast<std::size_t>(i)]);
    const auto count = static_cast<double>(ref.rows());
    if (!log_density) {
      double sum = 0.0;
      for (Index r = 0; r < ref.rows(); ++r) sum += std::exp(-squared_distance(query.row(i), ref.row(r)) / scale);
      out.values[i] = sum / count;
      return;
    }
    double peak = -std::numeric_limits<double>::infinity();
    for (Index r = 0; r < ref.rows(); ++r) peak = std::max(peak, -squared_distance(query.row(i), ref.row(r)) / scale);
    double sum = 0.0;
    for (Index r = 0; r < ref.rows(); ++r) {
      sum += std::exp(-squared_distance(query.row(i), ref.row(r)) / scale - peak);
    }
    out.values[i] = peak + std::log(sum) - std::log(count);
  });
  return out;
}

Vector sparsity_ratio_function(const Vector& sizes) {
  if (sizes.size() == 0) throw Error("sparsity ratio needs at least one node");
  for (Index i = 0; i < sizes.size(); ++i) {
    if (!(sizes[i] > 0.0) || !std::isfinite(sizes[i])) {
      throw Error("node size at index " + std::to_string(i) + " must be positive and finite");
    }
  }
  return sizes / sizes.maxCoeff();
}

}  // namespace margin
