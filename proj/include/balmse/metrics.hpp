#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "balmse/tabular.hpp"

namespace balmse {

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t tn = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + tn + fp + fn; }
};

/// Binary confusion counts; nonzero entries count as positive.
ConfusionCounts confusion(std::span<const int> y_true, std::span<const int> y_pred);

/// (TP/(TP+FN) + TN/(TN+FP)) / 2. Throws SingleClassTruth unless y_true
/// holds both classes.
double balanced_accuracy(std::span<const int> y_true, std::span<const int> y_pred);

/// Reconstruction quality on mixed data:
///   (1/p) [ sum_numeric MSE(scaled x, scaled x_hat) + sum_categorical (1 - BalAcc_q) ]
/// with BalAcc_q the mean of the one-vs-rest balanced accuracies of q's
/// categories. Numeric values are scaled with `enc`. Categories absent from
/// the original are left out of the mean; a variable with a single observed
/// category scores its error rate.
double msem(const Dataset& original, const Dataset& reconstructed, const EncoderState& enc);
/// Same, scaling numerics by the min/max of `original`.
double msem(const Dataset& original, const Dataset& reconstructed);

struct PredictionError {
  double mse = 0.0;
  double mae = 0.0;
  double rmse = 0.0;
};

PredictionError prediction_error(std::span<const double> y_true, std::span<const double> y_pred);

struct ClassificationScores {
  double f1 = 0.0;
  double balanced_accuracy = 0.0;
  double accuracy = 0.0;
  /// Set when no positive is predicted or none is present; f1 is then 0.
  bool f1_undefined = false;
};

/// With single-class truth, balanced_accuracy falls back to the recall of
/// the class that is present.
ClassificationScores classification_scores(std::span<const int> y_true, std::span<const int> y_pred);

/// Rank-based binary AUC (Mann-Whitney statistic, ties count one half).
double binary_auc(std::span<const int> y_true, std::span<const double> scores);

/// Average ranks (1-based); ties share the mean of their positions.
std::vector<double> average_ranks(std::span<const double> values);

double spearman(std::span<const double> x, std::span<const double> y);

/// Cramer's V without bias correction. Category codes are labels; only
/// observed values form table rows/columns.
double cramers_v(std::span<const int> a, std::span<const int> b);

/// Between-group over total sum of squares of x grouped by g. Only observed
/// group labels count; fewer than two groups throws EmptyGroup.
double eta_squared(std::span<const double> x, std::span<const int> g);
/// Variant with a declared group count: any of 0..group_count-1 that is
/// absent throws EmptyGroup.
double eta_squared(std::span<const double> x, std::span<const int> g, int group_count);

enum class PairKind { Spearman, CramersV, EtaSquared };

/// How mixed_correlation treats a pair whose statistic is undefined
/// (constant column, single observed category).
enum class DegeneratePolicy {
  Throw,
  /// Record 0: a variable with no spread carries no association.
  Zero,
};

struct MixedCorrelationMatrix {
  Matrix values;                              // p x p, symmetric
  std::vector<std::vector<PairKind>> kinds;  // p x p

  Eigen::Index size() const { return values.rows(); }
};

MixedCorrelationMatrix mixed_correlation(const Dataset& data, DegeneratePolicy policy = DegeneratePolicy::Throw);

/// Sum over unordered off-diagonal pairs of |entry(d1) - entry(d2)|.
/// Degenerate pairs score 0 (a hard reconstruction may collapse a variable
/// to a single category).
double mc_distance(const Dataset& d1, const Dataset& d2);

/// Mean silhouette with Euclidean distances; points of singleton clusters
/// score 0, and 0/0 is taken as 0.
double silhouette(const Matrix& points, std::span<const int> labels);

}  // namespace balmse
