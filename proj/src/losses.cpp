#include "balmse/losses.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "balmse/errors.hpp"

namespace balmse {

namespace {

void check_same_shape(const Matrix& pred, const Matrix& target) {
  require(pred.rows() == target.rows() && pred.cols() == target.cols(), ErrorKind::ShapeError,
          "prediction is " + std::to_string(pred.rows()) + "x" + std::to_string(pred.cols()) + ", target is " +
              std::to_string(target.rows()) + "x" + std::to_string(target.cols()));
  require(pred.size() > 0, ErrorKind::ShapeError, "empty loss input");
}

}  // namespace

LossWeights compute_balance_weights(const EncoderState& enc) {
  const auto width = static_cast<Eigen::Index>(enc.width());
  LossWeights w{Vector::Ones(width), Vector::Ones(width), std::vector<bool>(enc.width(), false)};
  const double n = static_cast<double>(enc.rows());
  for (Eigen::Index j = 0; j < width; ++j) {
    const auto& f = enc.feature(static_cast<std::size_t>(j));
    if (f.is_numeric()) continue;
    const auto& col = enc.schema().column(f.column);
    const auto count = enc.counts(f.column)[static_cast<std::size_t>(f.category)];
    require(count >= 1 && count + 1 <= enc.rows(), ErrorKind::DegenerateCategory,
            "category '" + col.categories[static_cast<std::size_t>(f.category)] + "' of '" + col.name + "' has count " +
                std::to_string(count) + " of " + std::to_string(enc.rows()));
    const double p_q = static_cast<double>(col.category_count());
    const double n_k = static_cast<double>(count);
    w.on_one(j) = n / (2.0 * p_q * n_k);
    w.on_zero(j) = n / (2.0 * p_q * (n - n_k));
    w.categorical[static_cast<std::size_t>(j)] = true;
  }
  return w;
}

LossWeights unit_weights(const EncoderState& enc) {
  const auto width = static_cast<Eigen::Index>(enc.width());
  LossWeights w{Vector::Ones(width), Vector::Ones(width), std::vector<bool>(enc.width(), false)};
  for (std::size_t j = 0; j < enc.width(); ++j) w.categorical[j] = !enc.feature(j).is_numeric();
  return w;
}

LossResult mse_loss(const Matrix& pred, const Matrix& target) {
  check_same_shape(pred, target);
  const double count = static_cast<double>(pred.size());
  const double scale = -2.0 / count;
  LossResult r;
  r.grad.resize(pred.rows(), pred.cols());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < pred.cols(); ++j) {
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
      const double diff = target(i, j) - pred(i, j);
      sum += diff * diff;
      r.grad(i, j) = scale * diff;
    }
  }
  r.value = sum / count;
  return r;
}

LossResult balanced_mse_loss(const Matrix& pred, const Matrix& target, const LossWeights& weights) {
  check_same_shape(pred, target);
  require(weights.size() == pred.cols(), ErrorKind::ShapeError, "loss weights do not match feature count");
  const double count = static_cast<double>(pred.size());
  const double scale = -2.0 / count;
  LossResult r;
  r.grad.resize(pred.rows(), pred.cols());
  double sum = 0.0;
  for (Eigen::Index j = 0; j < pred.cols(); ++j) {
    const bool categorical = weights.categorical[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < pred.rows(); ++i) {
      const double t = target(i, j);
      double w = weights.on_one(j);
      if (categorical) {
        require(t == 0.0 || t == 1.0, ErrorKind::NonBinaryTarget,
                "categorical target entry (" + std::to_string(i) + ", " + std::to_string(j) + ") is " +
                    std::to_string(t));
        if (t == 0.0) w = weights.on_zero(j);
      }
      const double diff = t - pred(i, j);
      sum += w * (diff * diff);
      r.grad(i, j) = (scale * w) * diff;
    }
  }
  r.value = sum / count;
  return r;
}

LossResult blended_loss(double alpha, const Matrix& pred, const Matrix& target, const LossWeights& weights) {
  require(alpha >= 0.0 && alpha <= 1.0, ErrorKind::AlphaOutOfRange, "alpha must lie in [0, 1]");
  auto plain = mse_loss(pred, target);
  auto balanced = balanced_mse_loss(pred, target, weights);
  LossResult r;
  r.value = alpha * plain.value + (1.0 - alpha) * balanced.value;
  r.grad = alpha * plain.grad + (1.0 - alpha) * balanced.grad;
  return r;
}

LossResult cross_entropy_loss(const Matrix& logits, const Matrix& target, const EncoderState& enc) {
  check_same_shape(logits, target);
  require(static_cast<std::size_t>(logits.cols()) == enc.width(), ErrorKind::ShapeError,
          "logit width does not match the feature map");
  const auto& schema = enc.schema();
  const double denom = static_cast<double>(logits.rows()) * static_cast<double>(schema.size());
  LossResult r;
  r.grad = Matrix::Zero(logits.rows(), logits.cols());
  double total = 0.0;
  for (std::size_t q = 0; q < schema.size(); ++q) {
    const auto off = static_cast<Eigen::Index>(enc.offset(q));
    const auto& col = schema.column(q);
    if (!col.is_categorical()) {
      for (Eigen::Index i = 0; i < logits.rows(); ++i) {
        const double diff = target(i, off) - logits(i, off);
        total += diff * diff;
        r.grad(i, off) = -2.0 * diff / denom;
      }
      continue;
    }
    const auto width = static_cast<Eigen::Index>(col.category_count());
    for (Eigen::Index i = 0; i < logits.rows(); ++i) {
      auto row = logits.row(i).segment(off, width);
      const double peak = row.maxCoeff();
      const double log_sum = peak + std::log((row.array() - peak).exp().sum());
      for (Eigen::Index k = 0; k < width; ++k) {
        const double t = target(i, off + k);
        const double log_prob = row(k) - log_sum;
        total -= t * log_prob;
        r.grad(i, off + k) = std::exp(log_prob) * target.row(i).segment(off, width).sum() / denom;
        r.grad(i, off + k) -= t / denom;
      }
    }
  }
  r.value = total / denom;
  return r;
}

LossSpec LossSpec::blended(double alpha) {
  require(alpha >= 0.0 && alpha <= 1.0, ErrorKind::AlphaOutOfRange, "alpha must lie in [0, 1]");
  return {LossKind::Blended, alpha};
}

LossSpec parse_loss(const std::string& text) {
  if (text == "standard" || text == "mse") return LossSpec::standard();
  if (text == "balanced" || text == "balmse") return LossSpec::balanced();
  if (text == "ce" || text == "cross-entropy") return LossSpec::cross_entropy();
  const std::string prefix = "blended:";
  if (text.rfind(prefix, 0) == 0) {
    const auto number = text.substr(prefix.size());
    std::size_t used = 0;
    double alpha = 0.0;
    try {
      alpha = std::stod(number, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    require(used == number.size() && used > 0, ErrorKind::ConfigError, "bad blended alpha in '" + text + "'");
    return LossSpec::blended(alpha);
  }
  fail(ErrorKind::ConfigError, "unknown loss '" + text + "' (expected standard|balanced|blended:<alpha>|ce)");
}

std::string to_string(const LossSpec& loss) {
  switch (loss.kind) {
    case LossKind::Standard: return "standard";
    case LossKind::Balanced: return "balanced";
    case LossKind::CrossEntropy: return "ce";
    case LossKind::Blended: {
      std::ostringstream os;
      os << "blended:" << loss.alpha;
      return os.str();
    }
  }
  return "unknown";
}

std::string file_tag(const LossSpec& loss) {
  auto s = to_string(loss);
  std::replace(s.begin(), s.end(), ':', '_');
  return s;
}

LossResult evaluate_loss(const LossSpec& loss, const Matrix& pred, const Matrix& target, const LossWeights& weights,
                         const EncoderState& enc) {
  switch (loss.kind) {
    case LossKind::Standard: return mse_loss(pred, target);
    case LossKind::Balanced: return balanced_mse_loss(pred, target, weights);
    case LossKind::Blended: return blended_loss(loss.alpha, pred, target, weights);
    case LossKind::CrossEntropy: return cross_entropy_loss(pred, target, enc);
  }
  fail(ErrorKind::ConfigError, "unknown loss kind");
}

}  // namespace balmse
