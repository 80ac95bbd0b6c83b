#include "margin/dataset.hpp"

#include <cmath>

#include "margin/error.hpp"

namespace margin {

void require_finite(const Matrix& features, const char* what) {
  for (Index r = 0; r < features.rows(); ++r) {
    for (Index c = 0; c < features.cols(); ++c) {
      if (!std::isfinite(features(r, c))) {
        throw Error(std::string("non-finite ") + what + " at row " + std::to_string(r) + ", column " +
                    std::to_string(c));
      }
    }
  }
}

void Dataset::check() const {
  require_finite(features);
  const auto n = static_cast<std::size_t>(size());
  if (labels && labels->size() != n) {
    throw Error("labels have " + std::to_string(labels->size()) + " rows but features have " + std::to_string(n));
  }
  if (flags && flags->size() != n) {
    throw Error("flags have " + std::to_string(flags->size()) + " rows but features have " + std::to_string(n));
  }
  if (!ids.empty() && ids.size() != n) {
    throw Error("ids have " + std::to_string(ids.size()) + " rows but features have " + std::to_string(n));
  }
}

Dataset Dataset::subset(const std::vector<Index>& rows) const {
  Dataset out;
  out.features.resize(static_cast<Index>(rows.size()), dims());
  if (labels) out.labels.emplace();
  if (flags) out.flags.emplace();
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Index r = rows[i];
    if (r < 0 || r >= size()) throw Error("subset row " + std::to_string(r) + " out of range");
    out.features.row(static_cast<Index>(i)) = features.row(r);
    if (labels) out.labels->push_back((*labels)[static_cast<std::size_t>(r)]);
    if (flags) out.flags->push_back((*flags)[static_cast<std::size_t>(r)]);
    if (!ids.empty()) out.ids.push_back(ids[static_cast<std::size_t>(r)]);
  }
  return out;
}

}  // namespace margin
