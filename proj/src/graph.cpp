#include "margin/graph.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

#include "margin/error.hpp"

namespace margin {
namespace {

using Triplet = Eigen::Triplet<double>;

const char* kind_name(ValidationIssue::Kind kind) {
  switch (kind) {
    case ValidationIssue::Kind::Asymmetric: return "asymmetric";
    case ValidationIssue::Kind::Negative: return "negative weight";
    case ValidationIssue::Kind::NonFinite: return "non-finite weight";
    case ValidationIssue::Kind::SelfLoop: return "self-loop";
  }
  return "unknown";
}

}  // namespace

Graph::Graph(SparseMatrix adjacency, bool allow_self_loops)
    : adjacency_(std::move(adjacency)), allow_self_loops_(allow_self_loops) {
  if (adjacency_.rows() != adjacency_.cols()) {
    throw Error("adjacency matrix must be square, got " + std::to_string(adjacency_.rows()) + "x" +
                std::to_string(adjacency_.cols()));
  }
  adjacency_.prune(0.0, 0.0);
  adjacency_.makeCompressed();
}

Graph Graph::from_edges(Index n_nodes, std::span<const Edge> edges, bool allow_self_loops) {
  if (n_nodes < 0) throw Error("node count must be nonnegative");
  std::vector<Triplet> triplets;
  triplets.reserve(edges.size() * 2);
  std::set<std::pair<Index, Index>> seen;
  for (const auto& e : edges) {
    if (e.src < 0 || e.dst < 0 || e.src >= n_nodes || e.dst >= n_nodes) {
      throw Error("edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) +
                  ") out of range for " + std::to_string(n_nodes) + " nodes");
    }
    if (!std::isfinite(e.weight)) {
      throw Error("non-finite weight on edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) + ")");
    }
    if (e.weight < 0.0) {
      throw Error("negative weight on edge (" + std::to_string(e.src) + "," + std::to_string(e.dst) + ")");
    }
    if (e.src == e.dst && !allow_self_loops) {
      throw Error("self-loop on node " + std::to_string(e.src) + " but self-loops are disabled");
    }
    const auto key = std::minmax(e.src, e.dst);
    if (!seen.insert(key).second) {
      throw Error("duplicate edge (" + std::to_string(key.first) + "," + std::to_string(key.second) + ")");
    }
    if (e.weight == 0.0) continue;
    triplets.emplace_back(e.src, e.dst, e.weight);
    if (e.src != e.dst) triplets.emplace_back(e.dst, e.src, e.weight);
  }
  SparseMatrix w(n_nodes, n_nodes);
  w.setFromTriplets(triplets.begin(), triplets.end());
  return Graph(std::move(w), allow_self_loops);
}

Graph Graph::from_dense(const Matrix& adjacency, bool allow_self_loops) {
  SparseMatrix w = adjacency.sparseView(0.0, 0.0);
  return Graph(std::move(w), allow_self_loops);
}

std::vector<Index> Graph::neighbors(Index node) const {
  std::vector<Index> out;
  for (SparseMatrix::InnerIterator it(adjacency_, node); it; ++it) out.push_back(it.col());
  return out;
}

std::vector<Edge> Graph::edges() const {
  std::vector<Edge> out;
  for (Index r = 0; r < adjacency_.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(adjacency_, r); it; ++it) {
      if (it.col() >= r) out.push_back({r, it.col(), it.value()});
    }
  }
  return out;
}

bool ValidationReport::has(ValidationIssue::Kind kind) const {
  return std::any_of(issues.begin(), issues.end(), [kind](const auto& i) { return i.kind == kind; });
}

std::string ValidationReport::summary() const {
  if (ok()) return "valid";
  std::ostringstream out;
  out << issues.size() << " issue(s):";
  const std::size_t shown = std::min<std::size_t>(issues.size(), 8);
  for (std::size_t i = 0; i < shown; ++i) {
    const auto& issue = issues[i];
    out << ' ' << kind_name(issue.kind) << " at (" << issue.row << ',' << issue.col << ')';
    if (i + 1 < shown) out << ';';
  }
  if (shown < issues.size()) out << " ...";
  return out.str();
}

ValidationReport validate(const Graph& graph) {
  ValidationReport report;
  const auto& w = graph.adjacency();
  for (Index r = 0; r < w.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(w, r); it; ++it) {
      const Index c = it.col();
      const double v = it.value();
      if (!std::isfinite(v)) {
        report.issues.push_back({ValidationIssue::Kind::NonFinite, r, c, v});
        continue;
      }
      if (v < 0.0) report.issues.push_back({ValidationIssue::Kind::Negative, r, c, v});
      if (r == c) {
        if (!graph.allows_self_loops()) report.issues.push_back({ValidationIssue::Kind::SelfLoop, r, c, v});
        continue;
      }
      const double mirror = w.coeff(c, r);
      // Report each asymmetric pair once: at the stored entry with the smaller
      // row, or at the lone stored entry when its mirror is missing.
      if (mirror != v && (r < c || mirror == 0.0)) {
        report.issues.push_back({ValidationIssue::Kind::Asymmetric, r, c, v});
      }
    }
  }
  return report;
}

void require_valid(const Graph& graph) {
  const auto report = validate(graph);
  if (!report.ok()) throw Error("invalid graph: " + report.summary());
}

DegreeInfo degree_info(const Graph& graph) {
  const auto& w = graph.adjacency();
  DegreeInfo info;
  info.degrees = Vector::Zero(graph.size());
  for (Index r = 0; r < w.outerSize(); ++r) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(w, r); it; ++it) sum += it.value();
    info.degrees[r] = sum;
    if (sum == 0.0) info.isolated.push_back(r);
  }
  return info;
}

LaplacianMatrix normalized_laplacian(const Graph& graph) {
  const auto degrees = degree_info(graph);
  const Index n = graph.size();
  Vector inv_sqrt(n);
  for (Index i = 0; i < n; ++i) {
    const double d = degrees.degrees[i];
    inv_sqrt[i] = d > 0.0 ? 1.0 / std::sqrt(d) : 0.0;
  }

  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(graph.adjacency().nonZeros() + n));
  const auto& w = graph.adjacency();
  for (Index r = 0; r < n; ++r) {
    double diagonal = 1.0;
    for (SparseMatrix::InnerIterator it(w, r); it; ++it) {
      const Index c = it.col();
      // Multiply the scale factors in index order so L[r,c] and L[c,r] are
      // bitwise identical.
      const double scale = inv_sqrt[std::min(r, c)] * inv_sqrt[std::max(r, c)];
      const double entry = it.value() * scale;
      if (c == r) {
        diagonal -= entry;
      } else {
        triplets.emplace_back(r, c, -entry);
      }
    }
    triplets.emplace_back(r, r, diagonal);
  }

  LaplacianMatrix out;
  out.values.resize(n, n);
  out.values.setFromTriplets(triplets.begin(), triplets.end());
  out.values.makeCompressed();
  out.isolated = degrees.isolated;
  out.convention = degrees.isolated.empty()
                       ? "L = I - D^-1/2 W D^-1/2"
                       : "L = I - D^-1/2 W D^-1/2; isolated nodes use D^-1/2 = 0 (L[n,n] = 1)";
  return out;
}

SparseMatrix permute(const SparseMatrix& matrix, std::span<const Index> order) {
  const Index n = matrix.rows();
  if (static_cast<Index>(order.size()) != n) throw Error("permutation length does not match matrix size");
  std::vector<Index> position(static_cast<std::size_t>(n), -1);
  for (Index i = 0; i < n; ++i) {
    const Index old = order[static_cast<std::size_t>(i)];
    if (old < 0 || old >= n || position[static_cast<std::size_t>(old)] != -1) throw Error("not a permutation");
    position[static_cast<std::size_t>(old)] = i;
  }
  std::vector<Triplet> triplets;
  triplets.reserve(static_cast<std::size_t>(matrix.nonZeros()));
  for (Index r = 0; r < matrix.outerSize(); ++r) {
    for (SparseMatrix::InnerIterator it(matrix, r); it; ++it) {
      triplets.emplace_back(position[static_cast<std::size_t>(r)], position[static_cast<std::size_t>(it.col())],
                            it.value());
    }
  }
  SparseMatrix out(n, n);
  out.setFromTriplets(triplets.begin(), triplets.end());
  out.makeCompressed();
  return out;
}

Graph permute(const Graph& graph, std::span<const Index> order) {
  return Graph(permute(graph.adjacency(), order), graph.allows_self_loops());
}

}  // namespace margin
