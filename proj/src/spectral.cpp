#include "margin/spectral.hpp"

#include <cmath>

#include "margin/error.hpp"
#include "margin/parallel.hpp"

namespace margin {
namespace {

void require_length(const ShiftOperator& op, Index rows) {
  if (rows != op.size()) {
    throw Error("signal has " + std::to_string(rows) + " entries but the operator has " + std::to_string(op.size()) +
                " nodes");
  }
}

}  // namespace

std::string_view to_string(ShiftKind kind) {
  switch (kind) {
    case ShiftKind::Adjacency: return "adjacency";
    case ShiftKind::Transition: return "transition";
    case ShiftKind::Laplacian: return "laplacian";
  }
  return "unknown";
}

ShiftKind parse_shift_kind(std::string_view text) {
  if (text == "adjacency") return ShiftKind::Adjacency;
  if (text == "transition") return ShiftKind::Transition;
  if (text == "laplacian") return ShiftKind::Laplacian;
  throw Error("unknown shift operator '" + std::string(text) + "' (expected adjacency, transition or laplacian)");
}

ShiftOperator shift_operator(const Graph& graph, ShiftKind kind) {
  require_valid(graph);
  ShiftOperator op;
  op.kind = kind;
  switch (kind) {
    case ShiftKind::Adjacency:
      op.values = graph.adjacency();
      op.isolated = degree_info(graph).isolated;
      break;
    case ShiftKind::Transition: {
      const auto degrees = degree_info(graph);
      op.values = graph.adjacency();
      for (Index r = 0; r < op.values.outerSize(); ++r) {
        const double d = degrees.degrees[r];
        for (SparseMatrix::InnerIterator it(op.values, r); it; ++it) it.valueRef() = it.value() / d;
      }
      op.row_stochastic = true;
      op.isolated = degrees.isolated;
      break;
    }
    case ShiftKind::Laplacian: {
      auto laplacian = normalized_laplacian(graph);
      op.values = std::move(laplacian.values);
      op.isolated = std::move(laplacian.isolated);
      break;
    }
  }
  return op;
}

Matrix apply_shift(const ShiftOperator& op, const Matrix& signal) {
  require_length(op, signal.rows());
  Matrix out(signal.rows(), signal.cols());
  const auto& a = op.values;
  parallel_for(0, a.outerSize(), [&](Index r) {
    for (Index c = 0; c < signal.cols(); ++c) {
      double sum = 0.0;
      for (SparseMatrix::InnerIterator it(a, r); it; ++it) sum += it.value() * signal(it.col(), c);
      out(r, c) = sum;
    }
  });
  return out;
}

Vector apply_shift(const ShiftOperator& op, const Vector& signal) {
  require_length(op, signal.size());
  Vector out(signal.size());
  const auto& a = op.values;
  parallel_for(0, a.outerSize(), [&](Index r) {
    double sum = 0.0;
    for (SparseMatrix::InnerIterator it(a, r); it; ++it) sum += it.value() * signal[it.col()];
    out[r] = sum;
  });
  return out;
}

Vector high_pass(const ShiftOperator& op, const Vector& signal) { return signal - apply_shift(op, signal); }

Matrix high_pass(const ShiftOperator& op, const Matrix& signal) { return signal - apply_shift(op, signal); }

FourierBasis fourier_basis(const ShiftOperator& op, const FourierOptions& options) {
  if (op.kind == ShiftKind::Transition) {
    throw Error("the transition operator is not symmetric in general; use the adjacency or laplacian operator for "
                "a Fourier basis");
  }
  const Index n = op.size();
  if (n > options.max_nodes) {
    throw Error("dense eigendecomposition of " + std::to_string(n) + " nodes exceeds the cap of " +
                std::to_string(options.max_nodes) + "; raise the cap or analyse a subgraph");
  }
  const Matrix dense = Matrix(op.values);
  if (n > 0 && (dense - dense.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error("shift operator is not symmetric");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> solver(dense);
  if (solver.info() != Eigen::Success) throw Error("eigendecomposition did not converge");

  FourierBasis basis;
  basis.eigenvalues = solver.eigenvalues();
  basis.eigenvectors = solver.eigenvectors();
  for (Index j = 0; j < n; ++j) {
    auto column = basis.eigenvectors.col(j);
    for (Index i = 0; i < n; ++i) {
      if (std::abs(column[i]) > 1e-12) {
        if (column[i] < 0.0) column = -column;
        break;
      }
    }
  }
  return basis;
}

Vector gft(const FourierBasis& basis, const Vector& signal) {
  if (signal.size() != basis.eigenvectors.rows()) throw Error("signal length does not match the Fourier basis");
  return basis.eigenvectors.transpose() * signal;
}

Vector igft(const FourierBasis& basis, const Vector& spectrum) {
  if (spectrum.size() != basis.eigenvectors.cols()) throw Error("spectrum length does not match the Fourier basis");
  return basis.eigenvectors * spectrum;
}

}  // namespace margin
