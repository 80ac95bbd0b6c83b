#pragma once

#include <string_view>
#include <vector>

#include "margin/graph.hpp"

namespace margin {

enum class ShiftKind { Adjacency, Transition, Laplacian };

std::string_view to_string(ShiftKind kind);
ShiftKind parse_shift_kind(std::string_view text);

/// Graph shift operator A: W, D^-1 W, or the normalized Laplacian.
struct ShiftOperator {
  ShiftKind kind = ShiftKind::Transition;
  SparseMatrix values;
  bool row_stochastic = false;
  std::vector<Index> isolated;

  Index size() const { return values.rows(); }
};

/// Builds A for a valid graph. Under the transition kind an isolated node
/// gets an all-zero row.
ShiftOperator shift_operator(const Graph& graph, ShiftKind kind);

/// A f (low-pass). Matrix signals are filtered column by column.
Vector apply_shift(const ShiftOperator& op, const Vector& signal);
Matrix apply_shift(const ShiftOperator& op, const Matrix& signal);

/// f - A f.
Vector high_pass(const ShiftOperator& op, const Vector& signal);
Matrix high_pass(const ShiftOperator& op, const Matrix& signal);

struct FourierBasis {
  Matrix eigenvectors;  // orthonormal columns, ascending eigenvalue
  Vector eigenvalues;
};

struct FourierOptions {
  Index max_nodes = 4096;
};

/// Dense eigendecomposition A = U diag(lambda) U^T of a symmetric operator.
/// Each eigenvector's first nonzero component is made positive. Transition
/// operators and asymmetric matrices are rejected, as is n > max_nodes.
FourierBasis fourier_basis(const ShiftOperator& op, const FourierOptions& options = {});

/// U^T f.
Vector gft(const FourierBasis& basis, const Vector& signal);
/// U s.
Vector igft(const FourierBasis& basis, const Vector& spectrum);

}  // namespace margin
