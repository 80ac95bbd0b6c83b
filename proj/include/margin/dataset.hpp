#pragma once

#include <optional>
#include <string>
#include <vector>

#include "margin/types.hpp"

namespace margin {

/// Samples as rows of a feature matrix, with optional per-sample labels,
/// boolean flags (e.g. adversarial marker) and string ids.
struct Dataset {
  Matrix features;
  std::optional<std::vector<int>> labels;
  std::optional<std::vector<bool>> flags;
  std::vector<std::string> ids;

  Index size() const { return features.rows(); }
  Index dims() const { return features.cols(); }

  /// Throws Error on non-finite features (with location) or on labels,
  /// flags or ids whose length differs from the row count.
  void check() const;

  /// Rows `rows` of this dataset, in the given order, with aligned metadata.
  Dataset subset(const std::vector<Index>& rows) const;
};

/// Throws Error naming the first non-finite entry.
void require_finite(const Matrix& features, const char* what = "feature");

}  // namespace margin
