#include "balmse/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include "balmse/errors.hpp"

namespace balmse {

namespace {

template <typename A, typename B>
void check_lengths(const A& a, const B& b) {
  require(a.size() == b.size(), ErrorKind::LengthMismatch,
          "lengths differ: " + std::to_string(a.size()) + " vs " + std::to_string(b.size()));
}

/// Map arbitrary labels onto 0..k-1 in order of first appearance.
std::vector<int> compact_labels(std::span<const int> labels, int* count) {
  std::map<int, int> ids;
  std::vector<int> out(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto [it, inserted] = ids.emplace(labels[i], static_cast<int>(ids.size()));
    out[i] = it->second;
  }
  *count = static_cast<int>(ids.size());
  return out;
}

double variance_sum(std::span<const double> v) {
  const double mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss;
}

}  // namespace

ConfusionCounts confusion(std::span<const int> y_true, std::span<const int> y_pred) {
  check_lengths(y_true, y_pred);
  ConfusionCounts c;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const bool t = y_true[i] != 0;
    const bool p = y_pred[i] != 0;
    if (t && p) ++c.tp;
    else if (!t && !p) ++c.tn;
    else if (!t && p) ++c.fp;
    else ++c.fn;
  }
  return c;
}

double balanced_accuracy(std::span<const int> y_true, std::span<const int> y_pred) {
  const auto c = confusion(y_true, y_pred);
  require(c.tp + c.fn > 0 && c.tn + c.fp > 0, ErrorKind::SingleClassTruth,
          "balanced accuracy needs both classes in the truth vector");
  const double sensitivity = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
  const double specificity = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
  return 0.5 * (sensitivity + specificity);
}

namespace {

template <typename Scale>
double msem_impl(const Dataset& original, const Dataset& reconstructed, Scale scale) {
  require(original.schema() == reconstructed.schema(), ErrorKind::SchemaMismatch,
          "msem: datasets have different schemas");
  require(original.rows() == reconstructed.rows(), ErrorKind::SchemaMismatch, "msem: row counts differ");
  require(original.rows() > 0, ErrorKind::ShapeError, "msem: empty dataset");
  const auto& schema = original.schema();
  const auto n = original.rows();
  double total = 0.0;
  for (std::size_t j = 0; j < schema.size(); ++j) {
    const auto& col = schema.column(j);
    if (col.is_categorical()) {
      const auto& truth = original.codes(j);
      const auto& recon = reconstructed.codes(j);
      std::vector<int> t(n), p(n);
      double balacc = 0.0;
      std::size_t scored = 0;
      for (std::size_t k = 0; k < col.category_count(); ++k) {
        std::size_t present = 0;
        for (std::size_t i = 0; i < n; ++i) {
          t[i] = truth[i] == static_cast<int>(k);
          p[i] = recon[i] == static_cast<int>(k);
          present += static_cast<std::size_t>(t[i]);
        }
        // A category absent from (or filling) the truth has no one-vs-rest score.
        if (present == 0 || present == n) continue;
        balacc += balanced_accuracy(t, p);
        ++scored;
      }
      if (scored > 0) total += 1.0 - balacc / static_cast<double>(scored);
      else total += 1.0 - static_cast<double>(std::inner_product(truth.begin(), truth.end(), recon.begin(), std::size_t{0},
                                                                std::plus<>(), std::equal_to<>())) /
                              static_cast<double>(n);
    } else {
      const auto& a = original.numeric(j);
      const auto& b = reconstructed.numeric(j);
      double ss = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        const double d = scale(j, a[i]) - scale(j, b[i]);
        ss += d * d;
      }
      total += ss / static_cast<double>(n);
    }
  }
  return total / static_cast<double>(schema.size());
}

}  // namespace

double msem(const Dataset& original, const Dataset& reconstructed, const EncoderState& enc) {
  require(original.schema() == enc.schema(), ErrorKind::SchemaMismatch, "msem: encoder schema differs");
  return msem_impl(original, reconstructed, [&](std::size_t j, double v) { return enc.scale(j, v); });
}

double msem(const Dataset& original, const Dataset& reconstructed) {
  const auto& schema = original.schema();
  std::vector<double> lo(schema.size(), 0.0), range(schema.size(), 1.0);
  for (std::size_t j = 0; j < schema.size(); ++j) {
    if (schema.column(j).is_categorical()) continue;
    const auto& v = original.numeric(j);
    if (v.empty()) continue;
    auto [mn, mx] = std::minmax_element(v.begin(), v.end());
    lo[j] = *mn;
    range[j] = *mx > *mn ? *mx - *mn : 1.0;
  }
  return msem_impl(original, reconstructed, [&](std::size_t j, double v) { return (v - lo[j]) / range[j]; });
}

PredictionError prediction_error(std::span<const double> y_true, std::span<const double> y_pred) {
  check_lengths(y_true, y_pred);
  require(!y_true.empty(), ErrorKind::LengthMismatch, "prediction_error needs at least one value");
  PredictionError e;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    const double d = y_true[i] - y_pred[i];
    e.mse += d * d;
    e.mae += std::abs(d);
  }
  e.mse /= static_cast<double>(y_true.size());
  e.mae /= static_cast<double>(y_true.size());
  e.rmse = std::sqrt(e.mse);
  return e;
}

ClassificationScores classification_scores(std::span<const int> y_true, std::span<const int> y_pred) {
  const auto c = confusion(y_true, y_pred);
  require(c.total() > 0, ErrorKind::LengthMismatch, "classification_scores needs at least one value");
  ClassificationScores s;
  if (c.tp + c.fp == 0 || c.tp + c.fn == 0) {
    s.f1 = 0.0;
    s.f1_undefined = true;
  } else {
    s.f1 = 2.0 * static_cast<double>(c.tp) / static_cast<double>(2 * c.tp + c.fp + c.fn);
  }
  const auto positives = c.tp + c.fn;
  const auto negatives = c.tn + c.fp;
  if (positives > 0 && negatives > 0) {
    s.balanced_accuracy = balanced_accuracy(y_true, y_pred);
  } else if (positives > 0) {
    s.balanced_accuracy = static_cast<double>(c.tp) / static_cast<double>(positives);
  } else {
    s.balanced_accuracy = static_cast<double>(c.tn) / static_cast<double>(negatives);
  }
  s.accuracy = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
  return s;
}

double binary_auc(std::span<const int> y_true, std::span<const double> scores) {
  check_lengths(y_true, scores);
  const auto ranks = average_ranks(scores);
  double rank_sum = 0.0;
  std::size_t positives = 0;
  for (std::size_t i = 0; i < y_true.size(); ++i) {
    if (y_true[i] != 0) {
      rank_sum += ranks[i];
      ++positives;
    }
  }
  const std::size_t negatives = y_true.size() - positives;
  require(positives > 0 && negatives > 0, ErrorKind::SingleClassTruth, "AUC needs both classes");
  const double p = static_cast<double>(positives);
  return (rank_sum - p * (p + 1.0) / 2.0) / (p * static_cast<double>(negatives));
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = rank;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> x, std::span<const double> y) {
  check_lengths(x, y);
  require(x.size() >= 2, ErrorKind::LengthMismatch, "spearman needs at least 2 values");
  const auto rx = average_ranks(x);
  const auto ry = average_ranks(y);
  const double n = static_cast<double>(x.size());
  const double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / n;
  const double my = std::accumulate(ry.begin(), ry.end(), 0.0) / n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < rx.size(); ++i) {
    sxy += (rx[i] - mx) * (ry[i] - my);
    sxx += (rx[i] - mx) * (rx[i] - mx);
    syy += (ry[i] - my) * (ry[i] - my);
  }
  require(sxx > 0.0 && syy > 0.0, ErrorKind::ZeroVariance, "spearman: constant input");
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

double cramers_v(std::span<const int> a, std::span<const int> b) {
  check_lengths(a, b);
  int rows = 0, cols = 0;
  const auto ca = compact_labels(a, &rows);
  const auto cb = compact_labels(b, &cols);
  require(rows >= 2 && cols >= 2, ErrorKind::DegenerateTable, "cramers_v needs at least 2 observed categories each");
  Matrix table = Matrix::Zero(rows, cols);
  for (std::size_t i = 0; i < ca.size(); ++i) table(ca[i], cb[i]) += 1.0;
  const double n = static_cast<double>(a.size());
  const Vector row_sums = table.rowwise().sum();
  const Vector col_sums = table.colwise().sum().transpose();
  double chi2 = 0.0;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const double expected = row_sums(r) * col_sums(c) / n;
      const double d = table(r, c) - expected;
      chi2 += d * d / expected;
    }
  }
  const double k = static_cast<double>(std::min(rows, cols) - 1);
  return std::clamp(std::sqrt(chi2 / (n * k)), 0.0, 1.0);
}

namespace {

double eta_squared_compact(std::span<const double> x, const std::vector<int>& groups, int count) {
  const double sst = variance_sum(x);
  require(sst > 0.0, ErrorKind::ZeroVariance, "eta_squared: constant numeric variable");
  const double mean = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
  std::vector<double> sums(static_cast<std::size_t>(count), 0.0);
  std::vector<std::size_t> sizes(static_cast<std::size_t>(count), 0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    sums[static_cast<std::size_t>(groups[i])] += x[i];
    ++sizes[static_cast<std::size_t>(groups[i])];
  }
  double ssb = 0.0;
  for (std::size_t k = 0; k < sums.size(); ++k) {
    require(sizes[k] > 0, ErrorKind::EmptyGroup, "eta_squared: group " + std::to_string(k) + " is empty");
    const double gm = sums[k] / static_cast<double>(sizes[k]);
    ssb += static_cast<double>(sizes[k]) * (gm - mean) * (gm - mean);
  }
  return std::clamp(ssb / sst, 0.0, 1.0);
}

}  // namespace

double eta_squared(std::span<const double> x, std::span<const int> g) {
  check_lengths(x, g);
  int count = 0;
  const auto groups = compact_labels(g, &count);
  require(count >= 2, ErrorKind::EmptyGroup, "eta_squared needs at least 2 non-empty groups");
  return eta_squared_compact(x, groups, count);
}

double eta_squared(std::span<const double> x, std::span<const int> g, int group_count) {
  check_lengths(x, g);
  require(group_count >= 2, ErrorKind::EmptyGroup, "eta_squared needs at least 2 groups");
  std::vector<int> groups(g.begin(), g.end());
  for (int v : groups) {
    require(v >= 0 && v < group_count, ErrorKind::EmptyGroup, "group label out of range");
  }
  return eta_squared_compact(x, groups, group_count);
}

MixedCorrelationMatrix mixed_correlation(const Dataset& data, DegeneratePolicy policy) {
  const auto& schema = data.schema();
  const auto p = static_cast<Eigen::Index>(schema.size());
  MixedCorrelationMatrix m{Matrix::Zero(p, p),
                           std::vector<std::vector<PairKind>>(schema.size(),
                                                              std::vector<PairKind>(schema.size(), PairKind::Spearman))};
  auto guarded = [&](auto&& compute) -> double {
    if (policy == DegeneratePolicy::Throw) return compute();
    try {
      return compute();
    } catch (const Error& e) {
      switch (e.kind()) {
        case ErrorKind::ZeroVariance:
        case ErrorKind::DegenerateTable:
        case ErrorKind::EmptyGroup:
          return 0.0;
        default:
          throw;
      }
    }
  };
  for (Eigen::Index a = 0; a < p; ++a) {
    for (Eigen::Index b = a; b < p; ++b) {
      const auto ia = static_cast<std::size_t>(a);
      const auto ib = static_cast<std::size_t>(b);
      const bool cat_a = schema.column(ia).is_categorical();
      const bool cat_b = schema.column(ib).is_categorical();
      PairKind kind;
      double value;
      if (!cat_a && !cat_b) {
        kind = PairKind::Spearman;
        value = a == b ? 1.0 : guarded([&] { return spearman(data.numeric(ia), data.numeric(ib)); });
      } else if (cat_a && cat_b) {
        kind = PairKind::CramersV;
        value = a == b ? 1.0 : guarded([&] { return cramers_v(data.codes(ia), data.codes(ib)); });
      } else {
        kind = PairKind::EtaSquared;
        const auto num = cat_a ? ib : ia;
        const auto cat = cat_a ? ia : ib;
        value = guarded([&] { return eta_squared(data.numeric(num), data.codes(cat)); });
      }
      m.values(a, b) = m.values(b, a) = value;
      m.kinds[ia][ib] = m.kinds[ib][ia] = kind;
    }
  }
  return m;
}

double mc_distance(const Dataset& d1, const Dataset& d2) {
  require(d1.schema() == d2.schema(), ErrorKind::SchemaMismatch, "mc_distance: schemas differ");
  const auto m1 = mixed_correlation(d1, DegeneratePolicy::Zero);
  const auto m2 = mixed_correlation(d2, DegeneratePolicy::Zero);
  double total = 0.0;
  for (Eigen::Index a = 0; a < m1.size(); ++a) {
    for (Eigen::Index b = a + 1; b < m1.size(); ++b) total += std::abs(m1.values(a, b) - m2.values(a, b));
  }
  return total;
}

double silhouette(const Matrix& points, std::span<const int> labels) {
  require(static_cast<std::size_t>(points.rows()) == labels.size(), ErrorKind::LengthMismatch,
          "silhouette: one label per point required");
  require(points.rows() >= 3, ErrorKind::LengthMismatch, "silhouette needs at least 3 points");
  int k = 0;
  const auto ids = compact_labels(labels, &k);
  require(k >= 2, ErrorKind::SingleCluster, "silhouette needs at least 2 clusters");
  const auto n = points.rows();
  std::vector<std::size_t> sizes(static_cast<std::size_t>(k), 0);
  for (int c : ids) ++sizes[static_cast<std::size_t>(c)];

  double total = 0.0;
  std::vector<double> sums(static_cast<std::size_t>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto own = static_cast<std::size_t>(ids[static_cast<std::size_t>(i)]);
    if (sizes[own] == 1) continue;  // singleton: s = 0
    std::fill(sums.begin(), sums.end(), 0.0);
    for (Eigen::Index j = 0; j < n; ++j) {
      if (j == i) continue;
      sums[static_cast<std::size_t>(ids[static_cast<std::size_t>(j)])] += (points.row(i) - points.row(j)).norm();
    }
    const double a = sums[own] / static_cast<double>(sizes[own] - 1);
    double b = std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < sums.size(); ++c) {
      if (c != own) b = std::min(b, sums[c] / static_cast<double>(sizes[c]));
    }
    const double denom = std::max(a, b);
    if (denom > 0.0) total += (b - a) / denom;
  }
  return total / static_cast<double>(n);
}

}  // namespace balmse
