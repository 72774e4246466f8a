#pragma once

#include <string>
#include <vector>

#include "balmse/tabular.hpp"

namespace balmse {

/// Per encoded feature, the weight applied to the squared error when the
/// target entry is 1 (`on_one`) and when it is 0 (`on_zero`). Numeric
/// features carry (1, 1) and are never checked for binary targets.
struct LossWeights {
  Vector on_one;
  Vector on_zero;
  std::vector<bool> categorical;

  Eigen::Index size() const { return on_one.size(); }
};

/// Balancing weights from training-split category counts:
///   on_one  = n / (2 p_q n_k)
///   on_zero = n / (2 p_q (n - n_k))
/// so every category, every categorical variable and every numeric column
/// contributes at most n to the summed squared error.
LossWeights compute_balance_weights(const EncoderState& enc);

/// All-ones weights with the categorical layout of `enc`.
LossWeights unit_weights(const EncoderState& enc);

struct LossResult {
  double value = 0.0;
  Matrix grad;  // d value / d pred
};

/// (1 / (B P)) sum (t - p)^2
LossResult mse_loss(const Matrix& pred, const Matrix& target);

/// (1 / (B P)) sum w(t) (t - p)^2, the weight selected by the target entry.
LossResult balanced_mse_loss(const Matrix& pred, const Matrix& target, const LossWeights& weights);

/// alpha * mse + (1 - alpha) * balanced mse
LossResult blended_loss(double alpha, const Matrix& pred, const Matrix& target, const LossWeights& weights);

/// Softmax cross-entropy per categorical variable on logits, squared error on
/// numeric features, averaged over rows and variables.
LossResult cross_entropy_loss(const Matrix& logits, const Matrix& target, const EncoderState& enc);

enum class LossKind { Standard, Balanced, Blended, CrossEntropy };

struct LossSpec {
  LossKind kind = LossKind::Standard;
  double alpha = 1.0;  // used by Blended only

  static LossSpec standard() { return {LossKind::Standard, 1.0}; }
  static LossSpec balanced() { return {LossKind::Balanced, 0.0}; }
  static LossSpec blended(double alpha);
  static LossSpec cross_entropy() { return {LossKind::CrossEntropy, 0.0}; }

  bool needs_weights() const { return kind == LossKind::Balanced || kind == LossKind::Blended; }
  bool operator==(const LossSpec&) const = default;
};

/// Accepts `standard`, `balanced`, `blended:<alpha>`, `ce`.
LossSpec parse_loss(const std::string& text);
std::string to_string(const LossSpec& loss);
/// Same as to_string with ':' replaced, for file names.
std::string file_tag(const LossSpec& loss);

/// Evaluate the configured loss. `enc` is used by cross-entropy only.
LossResult evaluate_loss(const LossSpec& loss, const Matrix& pred, const Matrix& target, const LossWeights& weights,
                         const EncoderState& enc);

}  // namespace balmse
