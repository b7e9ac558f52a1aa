#pragma once

#include <string_view>
#include <vector>

namespace caproute {

/// L2-normalized hashed feature vector. Zero vector for empty text.
struct FeatureVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  double l2_norm() const;
  /// Indices of nonzero entries, ascending. For sparse mat-vec loops.
  std::vector<uint32_t> nonzero_indices() const;
};

double cosine(const FeatureVector& a, const FeatureVector& b);

/// Bag-of-lines encoder for capability text. Each line contributes its
/// hashed tokens plus hashed (task-keyword, accuracy-bucket) pairs when the
/// line carries an accuracy percentage and a quoted keyword list; accuracy is
/// bucketed to 5% steps. Line order does not affect the result.
FeatureVector encode_capability(std::string_view text, int dim);

/// Hashed character n-gram encoder (n = 3, 4, 5) over lowercased text.
FeatureVector encode_instruction(std::string_view text, int dim);

}  // namespace caproute
