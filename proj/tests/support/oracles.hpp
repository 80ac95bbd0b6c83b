#pragma once

// Dense reference implementations written straight from the definitions.
// They share no code with the library beyond the Graph accessors and are
// only meant for small inputs.

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <utility>
#include <vector>

#include "margin/graph.hpp"
#include "margin/spectral.hpp"

namespace oracle {

using margin::Index;
using margin::Matrix;
using margin::Vector;

inline Matrix dense(const margin::SparseMatrix& m) {
  Matrix out = Matrix::Zero(m.rows(), m.cols());
  for (Index r = 0; r < m.outerSize(); ++r) {
    for (margin::SparseMatrix::InnerIterator it(m, r); it; ++it) out(it.row(), it.col()) = it.value();
  }
  return out;
}

inline Vector degrees(const Matrix& w) {
  Vector d(w.rows());
  for (Index i = 0; i < w.rows(); ++i) {
    double s = 0.0;
    for (Index j = 0; j < w.cols(); ++j) s += w(i, j);
    d[i] = s;
  }
  return d;
}

inline Matrix laplacian(const Matrix& w) {
  const Index n = w.rows();
  const Vector d = degrees(w);
  Matrix l = Matrix::Identity(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (d[i] > 0 && d[j] > 0) l(i, j) -= w(i, j) / std::sqrt(d[i] * d[j]);
    }
  }
  return l;
}

inline Matrix transition(const Matrix& w) {
  const Vector d = degrees(w);
  Matrix a = Matrix::Zero(w.rows(), w.cols());
  for (Index i = 0; i < w.rows(); ++i) {
    if (d[i] > 0) a.row(i) = w.row(i) / d[i];
  }
  return a;
}

inline Matrix shift(const Matrix& w, margin::ShiftKind kind) {
  switch (kind) {
    case margin::ShiftKind::Adjacency: return w;
    case margin::ShiftKind::Transition: return transition(w);
    case margin::ShiftKind::Laplacian: return laplacian(w);
  }
  return w;
}

inline Vector influence(const Matrix& w, const Vector& f, margin::ShiftKind kind) {
  const Vector h = f - shift(w, kind) * f;
  return h.array().square();
}

// The five steps of the p-hop filter, with P the 0/1 pattern of the p-th
// matrix power of the binary adjacency.
inline Vector phop(const Matrix& w, const Vector& f, int hops) {
  const Index n = w.rows();
  Matrix b = (w.array() > 0.0).cast<double>();
  Matrix power = Matrix::Identity(n, n);
  for (int h = 0; h < hops; ++h) power = power * b;
  const Matrix p = (power.array() > 0.0).cast<double>();
  const Vector m = p.rowwise().sum();
  Vector f1 = p * f;
  for (Index i = 0; i < n; ++i) f1[i] = m[i] > 0 ? f1[i] / m[i] : 0.0;
  Vector f2 = p * f1;
  for (Index i = 0; i < n; ++i) f2[i] = m[i] > 0 ? f2[i] / m[i] : 0.0;
  Vector g = (f1 - f2).cwiseAbs();
  // rounding noise is zero, otherwise normalizing would blow it up to 1
  const double floor = 64.0 * std::numeric_limits<double>::epsilon() * f.cwiseAbs().maxCoeff();
  for (Index i = 0; i < n; ++i) {
    if (g[i] <= floor) g[i] = 0.0;
  }
  const double top = g.maxCoeff();
  if (top > 0) g /= top;
  return g;
}

inline double rbf(const Matrix& a, Index i, const Matrix& b, Index j, double sigma) {
  double sq = 0.0;
  for (Index c = 0; c < a.cols(); ++c) {
    const double diff = a(i, c) - b(j, c);
    sq += diff * diff;
  }
  return std::exp(-sq / (2.0 * sigma * sigma));
}

inline double mmd2(const Matrix& a, const Matrix& b, double sigma) {
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.rows(); ++j) aa += rbf(a, i, a, j, sigma);
  for (Index i = 0; i < b.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j) bb += rbf(b, i, b, j, sigma);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j) ab += rbf(a, i, b, j, sigma);
  const double na = static_cast<double>(a.rows()), nb = static_cast<double>(b.rows());
  return aa / (na * na) + bb / (nb * nb) - 2.0 * ab / (na * nb);
}

inline double mmd2_unbiased(const Matrix& a, const Matrix& b, double sigma) {
  double aa = 0.0, bb = 0.0, ab = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.rows(); ++j)
      if (i != j) aa += rbf(a, i, a, j, sigma);
  for (Index i = 0; i < b.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j)
      if (i != j) bb += rbf(b, i, b, j, sigma);
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < b.rows(); ++j) ab += rbf(a, i, b, j, sigma);
  const double na = static_cast<double>(a.rows()), nb = static_cast<double>(b.rows());
  return aa / (na * (na - 1)) + bb / (nb * (nb - 1)) - 2.0 * ab / (na * nb);
}

inline Matrix rows(const Matrix& x, const std::vector<Index>& ids) {
  Matrix out(static_cast<Index>(ids.size()), x.cols());
  for (std::size_t r = 0; r < ids.size(); ++r) out.row(static_cast<Index>(r)) = x.row(ids[r]);
  return out;
}

// Leave-neighborhood-out MMD for one node, by explicit set construction.
// Returns nullopt-like -1 when nothing is left after removal.
inline double leave_out_mmd(const Matrix& x, const Matrix& w, Index node, double sigma,
                            const std::vector<Index>& population) {
  std::vector<Index> kept;
  for (Index j : population) {
    if (j != node && w(node, j) == 0.0) kept.push_back(j);
  }
  if (kept.empty()) return -1.0;
  std::vector<Index> with = kept;
  with.push_back(node);
  return mmd2(rows(x, kept), rows(x, with), sigma);
}

inline double median_distance(const Matrix& x) {
  std::vector<double> d;
  for (Index i = 0; i < x.rows(); ++i)
    for (Index j = i + 1; j < x.rows(); ++j) d.push_back((x.row(i) - x.row(j)).norm());
  std::sort(d.begin(), d.end());
  const std::size_t m = d.size();
  return m % 2 == 1 ? d[m / 2] : 0.5 * (d[m / 2 - 1] + d[m / 2]);
}

// Union-symmetrized k-NN edge set by exhaustive search, ties to lower index.
inline std::set<std::pair<Index, Index>> knn_edges(const Matrix& x, Index k) {
  std::set<std::pair<Index, Index>> edges;
  for (Index i = 0; i < x.rows(); ++i) {
    std::vector<std::pair<double, Index>> cand;
    for (Index j = 0; j < x.rows(); ++j) {
      if (j != i) cand.emplace_back((x.row(i) - x.row(j)).norm(), j);
    }
    std::sort(cand.begin(), cand.end());
    for (Index c = 0; c < k; ++c) {
      const Index j = cand[static_cast<std::size_t>(c)].second;
      edges.emplace(std::min(i, j), std::max(i, j));
    }
  }
  return edges;
}

inline double error_1nn(const Matrix& train, const std::vector<int>& train_labels, const Matrix& test,
                        const std::vector<int>& test_labels) {
  Index wrong = 0;
  for (Index t = 0; t < test.rows(); ++t) {
    Index best = 0;
    double best_d = INFINITY;
    for (Index r = 0; r < train.rows(); ++r) {
      const double d = (train.row(r) - test.row(t)).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = r;
      }
    }
    if (train_labels[static_cast<std::size_t>(best)] != test_labels[static_cast<std::size_t>(t)]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(test.rows());
}

// Probability that a random positive outscores a random negative, by
// counting all pairs.
inline double auc_pairs(const Vector& s, const std::vector<bool>& pos) {
  double wins = 0.0, pairs = 0.0;
  for (Index i = 0; i < s.size(); ++i) {
    if (!pos[static_cast<std::size_t>(i)]) continue;
    for (Index j = 0; j < s.size(); ++j) {
      if (pos[static_cast<std::size_t>(j)]) continue;
      pairs += 1.0;
      if (s[i] > s[j]) wins += 1.0;
      else if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

}  // namespace oracle
