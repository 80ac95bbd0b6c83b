#pragma once

#include <span>
#include <string>
#include <vector>

#include "margin/types.hpp"

namespace margin {

struct Edge {
  Index src = 0;
  Index dst = 0;
  double weight = 1.0;
};

/// Undirected weighted graph stored as a sparse adjacency matrix W.
///
/// The constructor takes W as given so that malformed inputs can still be
/// inspected with validate(). Use from_edges() to build a graph that is
/// symmetric and checked by construction. Node order is the row order of W
/// and is shared by every operator built on top of the graph.
class Graph {
 public:
  Graph() = default;
  explicit Graph(SparseMatrix adjacency, bool allow_self_loops = false);

  /// Symmetrizes an undirected edge list (each edge listed once) and
  /// validates the result. Throws Error on duplicates, out-of-range
  /// endpoints, bad weights, or self-loops when they are not allowed.
  /// Zero-weight edges are dropped.
  static Graph from_edges(Index n_nodes, std::span<const Edge> edges, bool allow_self_loops = false);

  /// Takes a dense matrix verbatim (no symmetrization); zeros are structural.
  static Graph from_dense(const Matrix& adjacency, bool allow_self_loops = false);

  Index size() const { return adjacency_.rows(); }
  const SparseMatrix& adjacency() const { return adjacency_; }
  bool allows_self_loops() const { return allow_self_loops_; }

  /// Column indices of the nonzero entries of row `node`, ascending.
  std::vector<Index> neighbors(Index node) const;

  /// Undirected edges with src <= dst, in row-major order.
  std::vector<Edge> edges() const;

 private:
  SparseMatrix adjacency_;
  bool allow_self_loops_ = false;
};

struct ValidationIssue {
  enum class Kind { Asymmetric, Negative, NonFinite, SelfLoop };
  Kind kind;
  Index row;
  Index col;
  double value;
};

struct ValidationReport {
  std::vector<ValidationIssue> issues;

  bool ok() const { return issues.empty(); }
  bool has(ValidationIssue::Kind kind) const;
  std::string summary() const;
};

ValidationReport validate(const Graph& graph);

/// Throws Error carrying the validation summary if the graph is invalid.
void require_valid(const Graph& graph);

struct DegreeInfo {
  Vector degrees;               // D_nn = sum_m W[n,m]
  std::vector<Index> isolated;  // nodes with zero degree, ascending
};

DegreeInfo degree_info(const Graph& graph);

struct LaplacianMatrix {
  SparseMatrix values;
  std::vector<Index> isolated;
  std::string convention;
};

/// L = I - D^{-1/2} W D^{-1/2}. Isolated nodes use D^{-1/2} = 0, so their
/// row is the identity row; the convention string says so whenever such a
/// node exists.
LaplacianMatrix normalized_laplacian(const Graph& graph);

/// Relabels nodes: node `order[i]` of the input becomes node i of the output.
Graph permute(const Graph& graph, std::span<const Index> order);

/// Same relabeling applied to a sparse operator (P A P^T).
SparseMatrix permute(const SparseMatrix& matrix, std::span<const Index> order);

}  // namespace margin
